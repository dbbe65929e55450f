#include "herglotz/problem.hpp"

#include "herglotz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace herglotz {

Environment environment_at(const PhasePoint& p)
{
    Environment env;
    env.bind(Variable::time(), p.t);
    for (Eigen::Index i = 0; i < p.x.size(); ++i)
        env.bind(Variable::position(static_cast<int>(i) + 1), p.x(i));
    for (Eigen::Index i = 0; i < p.v.size(); ++i)
        env.bind(Variable::velocity(static_cast<int>(i) + 1), p.v(i));
    env.bind(Variable::functional(), p.z);
    return env;
}

namespace {

void check_alphabet(const Expression& e, int n, bool allow_parameter, const std::string& what)
{
    for (const Variable& var : e.free_variables()) {
        switch (var.kind) {
        case VariableKind::position:
        case VariableKind::velocity:
            if (var.index > n)
                throw ValidationError(what + " references " + var.name() + " but the problem has n = " +
                                      std::to_string(n));
            break;
        case VariableKind::parameter:
            if (!allow_parameter)
                throw ValidationError(what + " must not reference the family parameter s");
            break;
        default:
            break;
        }
    }
}

std::shared_ptr<const LagrangianPartials> build_partials(const Expression& L, int n)
{
    auto p = std::make_shared<LagrangianPartials>();
    p->L = L;
    p->dt = differentiate(L, Variable::time());
    p->dz = differentiate(L, Variable::functional());
    p->dx.resize(n);
    p->dv.resize(n);
    p->dv_dt.resize(n);
    p->dv_dz.resize(n);
    p->dv_dx.assign(n, std::vector<Expression>(n));
    p->dv_dv.assign(n, std::vector<Expression>(n));
    for (int i = 0; i < n; ++i) {
        p->dx[i] = differentiate(L, Variable::position(i + 1));
        p->dv[i] = differentiate(L, Variable::velocity(i + 1));
        p->dv_dt[i] = differentiate(p->dv[i], Variable::time());
        p->dv_dz[i] = differentiate(p->dv[i], Variable::functional());
        for (int j = 0; j < n; ++j) {
            p->dv_dx[i][j] = differentiate(p->dv[i], Variable::position(j + 1));
            p->dv_dv[i][j] = differentiate(p->dv[i], Variable::velocity(j + 1));
        }
    }
    return p;
}

} // namespace

HerglotzProblem::HerglotzProblem(int n, double a, double b, Expression lagrangian, Eigen::VectorXd alpha,
                                 double gamma)
    : n_(n), a_(a), b_(b), alpha_(std::move(alpha)), gamma_(gamma)
{
    if (n < 1)
        throw ValidationError("state dimension must be positive, got " + std::to_string(n));
    if (!(a < b))
        throw ValidationError("interval must satisfy a < b");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(gamma))
        throw ValidationError("interval and gamma must be finite");
    if (alpha_.size() != n)
        throw ValidationError("alpha has length " + std::to_string(alpha_.size()) + ", expected " +
                              std::to_string(n));
    if (!alpha_.allFinite())
        throw ValidationError("alpha must be finite");
    check_alphabet(lagrangian, n, false, "Lagrangian");
    partials_ = build_partials(lagrangian, n);
}

double HerglotzProblem::lagrangian_at(const PhasePoint& p) const
{
    return evaluate(partials_->L, environment_at(p));
}

LagrangianJet HerglotzProblem::jet(const PhasePoint& p, bool second_order) const
{
    const Environment env = environment_at(p);
    const LagrangianPartials& d = *partials_;
    LagrangianJet j;
    j.value = evaluate(d.L, env);
    j.dt = evaluate(d.dt, env);
    j.dz = evaluate(d.dz, env);
    j.dx.resize(n_);
    j.dv.resize(n_);
    for (int i = 0; i < n_; ++i) {
        j.dx(i) = evaluate(d.dx[i], env);
        j.dv(i) = evaluate(d.dv[i], env);
    }
    if (!second_order)
        return j;
    j.dv_dt.resize(n_);
    j.dv_dz.resize(n_);
    j.dv_dx.resize(n_, n_);
    j.dv_dv.resize(n_, n_);
    for (int i = 0; i < n_; ++i) {
        j.dv_dt(i) = evaluate(d.dv_dt[i], env);
        j.dv_dz(i) = evaluate(d.dv_dz[i], env);
        for (int k = 0; k < n_; ++k) {
            j.dv_dx(i, k) = evaluate(d.dv_dx[i][k], env);
            j.dv_dv(i, k) = evaluate(d.dv_dv[i][k], env);
        }
    }
    return j;
}

HerglotzProblem make_problem(int n, double a, double b, const Expression& lagrangian,
                             const Eigen::VectorXd& alpha, double gamma)
{
    return HerglotzProblem(n, a, b, lagrangian, alpha, gamma);
}

HerglotzProblem make_problem(int n, double a, double b, std::string_view lagrangian,
                             const Eigen::VectorXd& alpha, double gamma)
{
    return HerglotzProblem(n, a, b, parse(lagrangian), alpha, gamma);
}

bool is_classical(const HerglotzProblem& p)
{
    return !p.lagrangian().depends_on(Variable::functional());
}

// ---------------------------------------------------------------------------

std::vector<Expression> OCForm::dynamics_z_partials() const
{
    std::vector<Expression> out;
    out.reserve(dynamics.size());
    for (const Expression& g : dynamics)
        out.push_back(differentiate(g, Variable::functional()));
    return out;
}

OCForm to_optimal_control(const HerglotzProblem& p)
{
    OCForm oc;
    oc.state_dim = p.dimension() + 1;
    oc.control_dim = p.dimension();
    for (int i = 1; i <= p.dimension(); ++i)
        oc.dynamics.emplace_back(Variable::velocity(i));
    oc.dynamics.push_back(p.lagrangian());
    oc.payoff = Expression(Variable::functional());
    oc.running_cost = Expression();
    return oc;
}

double hamiltonian(const HerglotzProblem& p, const PhasePoint& point, const Eigen::VectorXd& psi_x,
                   double psi_z)
{
    return psi_x.dot(point.v) + psi_z * p.lagrangian_at(point);
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(Eigen::VectorXd times, Eigen::MatrixXd positions, Eigen::MatrixXd velocities,
                       Eigen::VectorXd functional, std::vector<int> breakpoints)
    : times_(std::move(times)),
      positions_(std::move(positions)),
      velocities_(std::move(velocities)),
      functional_(std::move(functional)),
      breakpoints_(std::move(breakpoints))
{
    const Eigen::Index m = times_.size();
    if (m < 2)
        throw ValidationError("trajectory needs at least two samples");
    if (positions_.cols() != m || velocities_.cols() != m || functional_.size() != m)
        throw ValidationError("trajectory sample counts disagree");
    if (positions_.rows() != velocities_.rows() || positions_.rows() < 1)
        throw ValidationError("trajectory position and velocity dimensions disagree");
    for (Eigen::Index k = 1; k < m; ++k)
        if (!(times_(k) > times_(k - 1)))
            throw ValidationError("mesh must be strictly increasing (index " + std::to_string(k) + ")");
    if (!times_.allFinite() || !positions_.allFinite() || !velocities_.allFinite() || !functional_.allFinite())
        throw ValidationError("trajectory samples must be finite");
    std::sort(breakpoints_.begin(), breakpoints_.end());
    breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
    for (int bp : breakpoints_)
        if (bp <= 0 || bp >= m - 1)
            throw ValidationError("breakpoints must be interior sample indices");
}

PhasePoint Trajectory::point(int k) const
{
    return {times_(k), positions_.col(k), velocities_.col(k), functional_(k)};
}

PhasePoint Trajectory::midpoint(int k, const HerglotzProblem& p) const
{
    const PhasePoint lo = point(k);
    const PhasePoint hi = point(k + 1);
    const double h = hi.t - lo.t;
    PhasePoint mid;
    mid.t = 0.5 * (lo.t + hi.t);
    mid.x = 0.5 * (lo.x + hi.x) + (h / 8.0) * (lo.v - hi.v);
    mid.v = (1.5 / h) * (hi.x - lo.x) - 0.25 * (lo.v + hi.v);
    mid.z = 0.5 * (lo.z + hi.z) + (h / 8.0) * (p.lagrangian_at(lo) - p.lagrangian_at(hi));
    return mid;
}

bool Trajectory::near_breakpoint(int k) const
{
    return std::any_of(breakpoints_.begin(), breakpoints_.end(), [k](int bp) { return std::abs(bp - k) <= 1; });
}

void validate_mesh(const HerglotzProblem& p, const Trajectory& traj)
{
    if (traj.dimension() != p.dimension())
        throw ValidationError("trajectory dimension " + std::to_string(traj.dimension()) +
                              " does not match problem dimension " + std::to_string(p.dimension()));
    if (traj.times()(0) != p.a() || traj.times()(traj.samples() - 1) != p.b())
        throw ValidationError("mesh must start at a and end at b exactly");
}

// ---------------------------------------------------------------------------

double AdmissibilityReport::max_abs() const
{
    return std::max({dynamics.max_abs, initial_x_defect, initial_z_defect});
}

double default_admissibility_tolerance(const HerglotzProblem& p, const Trajectory& traj)
{
    return 1e-8 * (1.0 + std::abs(p.gamma()) + traj.functional().cwiseAbs().maxCoeff());
}

Eigen::VectorXd interval_integrals(const HerglotzProblem& p, const Trajectory& traj)
{
    const int N = traj.intervals();
    Eigen::VectorXd lv(N + 1);
    for (int k = 0; k <= N; ++k)
        lv(k) = p.lagrangian_at(traj.point(k));
    Eigen::VectorXd out(N);
    for (int k = 0; k < N; ++k) {
        const double h = traj.times()(k + 1) - traj.times()(k);
        out(k) = h / 6.0 * (lv(k) + 4.0 * p.lagrangian_at(traj.midpoint(k, p)) + lv(k + 1));
    }
    return out;
}

AdmissibilityReport admissibility_residual(const HerglotzProblem& p, const Trajectory& traj)
{
    return admissibility_residual(p, traj, default_admissibility_tolerance(p, traj));
}

AdmissibilityReport admissibility_residual(const HerglotzProblem& p, const Trajectory& traj, double tolerance)
{
    validate_mesh(p, traj);
    const int N = traj.intervals();
    const Eigen::VectorXd integrals = interval_integrals(p, traj);
    Eigen::VectorXd mid_times(N);
    Eigen::MatrixXd values(1, N);
    std::vector<bool> included(N, true);
    for (int k = 0; k < N; ++k) {
        const double t0 = traj.times()(k);
        const double t1 = traj.times()(k + 1);
        mid_times(k) = 0.5 * (t0 + t1);
        values(0, k) = (traj.functional()(k + 1) - traj.functional()(k) - integrals(k)) / (t1 - t0);
        for (int bp : traj.breakpoints())
            if (k == bp - 1 || k == bp)
                included[k] = false;
    }
    AdmissibilityReport r;
    r.dynamics = ResidualReport::make("admissibility", std::move(mid_times), std::move(values), std::move(included));
    r.initial_x_defect = (traj.positions().col(0) - p.alpha()).cwiseAbs().maxCoeff();
    r.initial_z_defect = std::abs(traj.functional()(0) - p.gamma());
    r.tolerance = tolerance;
    return r;
}

} // namespace herglotz
