#include "herglotz/extremal.hpp"

#include "herglotz/errors.hpp"
#include "herglotz/integrate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace herglotz {

namespace {

std::string describe(const PhasePoint& p)
{
    std::ostringstream os;
    os.precision(17);
    os << "t = " << p.t << ", x = [" << p.x.transpose() << "], dx = [" << p.v.transpose() << "], z = " << p.z;
    return os.str();
}

} // namespace

EulerLagrangeField::EulerLagrangeField(const HerglotzProblem& p, Coupling coupling)
    : problem_(p), coupling_(coupling)
{
}

SecondOrderRate EulerLagrangeField::operator()(const PhasePoint& point) const
{
    const LagrangianJet j = problem_.jet(point);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(j.dv_dv, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || smax / smin > 1e12)
        throw IrregularLagrangianError("irregular Lagrangian: velocity Hessian is singular at " + describe(point));

    Eigen::VectorXd rhs = j.dx - j.dv_dt - j.dv_dx * point.v - j.dv_dz * j.value;
    if (coupling_ == Coupling::generalized)
        rhs += j.dz * j.dv;

    SecondOrderRate out;
    out.acceleration = svd.solve(rhs);
    out.functional_rate = j.value;
    return out;
}

Eigen::VectorXd EulerLagrangeField::state_rate(double t, const Eigen::VectorXd& y) const
{
    const int n = problem_.dimension();
    PhasePoint point{t, y.head(n), y.segment(n, n), y(2 * n)};
    const SecondOrderRate r = (*this)(point);
    Eigen::VectorXd dy(2 * n + 1);
    dy.head(n) = point.v;
    dy.segment(n, n) = r.acceleration;
    dy(2 * n) = r.functional_rate;
    return dy;
}

EulerLagrangeField el_explicit_form(const HerglotzProblem& p)
{
    return EulerLagrangeField(p, Coupling::generalized);
}

Trajectory integrate_extremal(const EulerLagrangeField& field, const Eigen::VectorXd& v0, int steps)
{
    const HerglotzProblem& p = field.problem();
    const int n = p.dimension();
    if (v0.size() != n)
        throw ValidationError("initial velocity has length " + std::to_string(v0.size()) + ", expected " +
                              std::to_string(n));
    Eigen::VectorXd y0(2 * n + 1);
    y0 << p.alpha(), v0, p.gamma();
    auto rate = [&field](double t, const Eigen::VectorXd& y) { return field.state_rate(t, y); };
    OdeSolution<double> sol = rk4_ivp<double>(rate, p.a(), y0, p.b(), steps);
    return Trajectory(std::move(sol.t), sol.y.topRows(n), sol.y.middleRows(n, n), sol.y.row(2 * n).transpose());
}

Eigen::VectorXd terminal_momentum(const HerglotzProblem& p, const Trajectory& traj)
{
    const Environment env = environment_at(traj.point(traj.samples() - 1));
    Eigen::VectorXd out(p.dimension());
    for (int i = 0; i < p.dimension(); ++i)
        out(i) = evaluate(p.partials().dv[i], env);
    return out;
}

ShootingResult shoot(const HerglotzProblem& p, const Eigen::VectorXd& guess, const ShootingOptions& options)
{
    const int n = p.dimension();
    if (guess.size() != n)
        throw ValidationError("initial guess has length " + std::to_string(guess.size()) + ", expected " +
                              std::to_string(n));
    if (options.steps < 4)
        throw ValidationError("shooting needs at least 4 steps");

    const EulerLagrangeField field = el_explicit_form(p);
    ShootingResult result;
    Eigen::VectorXd v = guess;

    auto residual = [&](const Eigen::VectorXd& vv, Trajectory* traj_out) {
        Trajectory traj = integrate_extremal(field, vv, options.steps);
        Eigen::VectorXd F = terminal_momentum(p, traj);
        if (traj_out != nullptr)
            *traj_out = std::move(traj);
        return F;
    };

    for (int iter = 0;; ++iter) {
        Trajectory traj;
        Eigen::VectorXd F;
        bool finite_flow = true;
        try {
            F = residual(v, &traj);
        } catch (const IntegrationError&) {
            finite_flow = false;
        } catch (const EvaluationError&) {
            finite_flow = false;
        }
        if (!finite_flow) {
            result.iterations = iter;
            result.converged = false;
            result.v_star = v;
            result.transversality_norm = std::numeric_limits<double>::infinity();
            result.history.push_back({v, result.transversality_norm});
            return result;
        }
        const double norm = F.cwiseAbs().maxCoeff();
        result.history.push_back({v, norm});
        result.v_star = v;
        result.transversality_norm = norm;
        result.iterations = iter;

        if (norm <= options.tol) {
            result.converged = true;
            result.multipliers = compute_psi_z(p, traj);
            result.trajectory = std::move(traj);
            return result;
        }
        if (iter >= options.max_iter || !std::isfinite(norm)) {
            result.converged = false;
            result.trajectory = std::move(traj);
            return result;
        }

        const double step = 1e-6 * (1.0 + v.cwiseAbs().maxCoeff());
        Eigen::MatrixXd J(n, n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd vp = v;
            vp(j) += step;
            J.col(j) = (residual(vp, nullptr) - F) / step;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible() || !J.allFinite())
            throw ShootingError("singular finite-difference Jacobian at iteration " + std::to_string(iter));
        v -= lu.solve(F);
    }
}

} // namespace herglotz
