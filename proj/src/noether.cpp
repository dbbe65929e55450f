#include "herglotz/noether.hpp"

#include "herglotz/conditions.hpp"
#include "herglotz/errors.hpp"
#include "herglotz/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace herglotz {

TransformationFamily::TransformationFamily(std::string name, Expression time_map,
                                           std::vector<Expression> position_maps, Expression functional_map,
                                           std::optional<bool> expected_invariant)
    : name_(std::move(name)),
      time_map_(std::move(time_map)),
      position_maps_(std::move(position_maps)),
      functional_map_(std::move(functional_map)),
      expected_invariant_(expected_invariant)
{
}

void TransformationFamily::validate(const HerglotzProblem& p) const
{
    const int n = p.dimension();
    if (static_cast<int>(position_maps_.size()) != n)
        throw ValidationError("family '" + name_ + "' has " + std::to_string(position_maps_.size()) +
                              " position maps, expected " + std::to_string(n));
    auto check = [&](const Expression& e) {
        for (const Variable& var : e.free_variables())
            if ((var.kind == VariableKind::position || var.kind == VariableKind::velocity) && var.index > n)
                throw ValidationError("family '" + name_ + "' references " + var.name() +
                                      " but the problem has n = " + std::to_string(n));
    };
    check(time_map_);
    for (const Expression& e : position_maps_)
        check(e);
    check(functional_map_);

    std::mt19937_64 rng(20140803);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> when(p.a(), p.b());
    auto close = [](double got, double want) { return std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)); };
    for (int trial = 0; trial < 20; ++trial) {
        PhasePoint pt;
        pt.t = when(rng);
        pt.x = Eigen::VectorXd::NullaryExpr(n, [&] { return unit(rng); });
        pt.v = Eigen::VectorXd::NullaryExpr(n, [&] { return unit(rng); });
        pt.z = unit(rng);
        Environment env = environment_at(pt);
        env.bind(Variable::parameter(), 0.0);
        try {
            bool ok = close(evaluate(time_map_, env), pt.t) && close(evaluate(functional_map_, env), pt.z);
            for (int i = 0; i < n && ok; ++i)
                ok = close(evaluate(position_maps_[i], env), pt.x(i));
            if (!ok)
                throw ValidationError("family '" + name_ + "' is not the identity at s = 0");
        } catch (const EvaluationError& e) {
            throw ValidationError("family '" + name_ + "' cannot be evaluated at s = 0: " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

Environment sample_environment(const Trajectory& traj, int k, double s)
{
    Environment env = environment_at(traj.point(k));
    env.bind(Variable::parameter(), s);
    return env;
}

double max_abs_included(const Trajectory& traj, const Eigen::VectorXd& r)
{
    double out = 0.0;
    for (int k = 0; k < traj.samples(); ++k)
        if (!traj.near_breakpoint(k))
            out = std::max(out, std::abs(r(k)));
    return out;
}

/// Least-squares slope of log(defect) against log|s|; +inf when the
/// defects vanish at (almost) every s.
double fitted_order(const std::vector<double>& s, const std::vector<double>& defect)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (defect[i] > std::numeric_limits<double>::min() && s[i] != 0.0) {
            lx.push_back(std::log(std::abs(s[i])));
            ly.push_back(std::log(defect[i]));
        }
    }
    if (lx.size() < 2)
        return std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / n;
        my += ly[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0)
        return std::numeric_limits<double>::infinity();
    return sxy / sxx;
}

/// Defect divided by |s| at the smallest |s| (worst sign).
double first_variation(const std::vector<double>& s, const std::vector<double>& defect)
{
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : s)
        if (v != 0.0)
            smallest = std::min(smallest, std::abs(v));
    double out = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (std::abs(s[i]) == smallest)
            out = std::max(out, defect[i] / smallest);
    return out;
}

struct ConditionResiduals {
    Eigen::VectorXd time_condition;
    Eigen::VectorXd dynamics_condition;
};

ConditionResiduals invariance_residuals(const HerglotzProblem& p, const TransformationFamily& fam,
                                        const Trajectory& traj, double xi, double s)
{
    const int n = p.dimension();
    const int m = traj.samples();
    Eigen::VectorXd Ts(m), Zs(m);
    Eigen::MatrixXd Xs(n, m);
    for (int k = 0; k < m; ++k) {
        const Environment env = sample_environment(traj, k, s);
        Ts(k) = evaluate(fam.time_map(), env);
        Zs(k) = evaluate(fam.functional_map(), env);
        for (int i = 0; i < n; ++i)
            Xs(i, k) = evaluate(fam.position_maps()[i], env);
    }
    const Eigen::VectorXd dTs = time_derivative(traj.times(), Ts);
    const Eigen::MatrixXd dXs = time_derivative(traj.times(), Xs);
    const Eigen::VectorXd dZs = time_derivative(traj.times(), Zs);

    const double c = traj.functional()(m - 1) / (p.b() - p.a());
    ConditionResiduals r{Eigen::VectorXd(m), Eigen::VectorXd(m)};
    for (int k = 0; k < m; ++k) {
        if (!(dTs(k) > 0.0))
            throw InvarianceError("family '" + fam.name() + "': dT^s/dt <= 0 at t = " +
                                  std::to_string(traj.times()(k)) + " for s = " + format_number(s));
        PhasePoint image{Ts(k), Xs.col(k), dXs.col(k) / dTs(k), Zs(k)};
        r.time_condition(k) = (c + xi * s) * dTs(k) - c;
        r.dynamics_condition(k) = dZs(k) - p.lagrangian_at(image) * dTs(k);
    }
    return r;
}

} // namespace

Generators generators(const TransformationFamily& fam, const Trajectory& traj)
{
    const Variable s = Variable::parameter();
    const Expression dT = differentiate(fam.time_map(), s);
    const Expression dZ = differentiate(fam.functional_map(), s);
    std::vector<Expression> dX;
    for (const Expression& e : fam.position_maps())
        dX.push_back(differentiate(e, s));

    const int n = static_cast<int>(dX.size());
    const int m = traj.samples();
    Generators g;
    g.times = traj.times();
    g.T.resize(m);
    g.Z.resize(m);
    g.X.resize(n, m);
    for (int k = 0; k < m; ++k) {
        const Environment env = sample_environment(traj, k, 0.0);
        g.T(k) = evaluate(dT, env);
        g.Z(k) = evaluate(dZ, env);
        for (int i = 0; i < n; ++i)
            g.X(i, k) = evaluate(dX[i], env);
    }
    if (!g.T.allFinite() || !g.X.allFinite() || !g.Z.allFinite())
        throw InvarianceError("family '" + fam.name() + "' has non-finite generators");

    const Eigen::VectorXd rate = time_derivative(traj.times(), g.T);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    int count = 0;
    for (int k = 0; k < m; ++k) {
        if (traj.near_breakpoint(k))
            continue;
        lo = std::min(lo, rate(k));
        hi = std::max(hi, rate(k));
        sum += rate(k);
        ++count;
    }
    g.time_rate_variation = hi - lo;
    if (g.time_rate_variation <= 1e-8) {
        const double a = traj.times()(0);
        const double b = traj.times()(m - 1);
        const double z_b = traj.functional()(m - 1);
        g.xi = -(z_b / (b - a)) * (sum / count) + 0.0;
    }
    return g;
}

std::vector<double> default_s_values()
{
    return {1e-2, -1e-2, 1e-3, -1e-3};
}

InvarianceReport check_invariance(const HerglotzProblem& p, const TransformationFamily& fam, const Trajectory& traj,
                                  const std::vector<double>& s_values)
{
    validate_mesh(p, traj);
    fam.validate(p);
    InvarianceReport rep;
    rep.family = fam.name();

    const Generators gen = generators(fam, traj);
    rep.xi = gen.xi;
    if (!gen.xi) {
        rep.reason = "dT/dt varies along the trajectory (variation " + format_number(gen.time_rate_variation) +
                     "), so no constant xi satisfies the time condition";
        return rep;
    }
    const double xi = *gen.xi;

    const ConditionResiduals base = invariance_residuals(p, fam, traj, xi, 0.0);
    rep.noise_floor =
        1e-8 + 10.0 * std::max(max_abs_included(traj, base.time_condition), max_abs_included(traj, base.dynamics_condition));

    std::vector<double> s_used, time_defect, dyn_defect;
    for (double s : s_values) {
        if (s == 0.0)
            continue;
        const ConditionResiduals r = invariance_residuals(p, fam, traj, xi, s);
        InvarianceSample sample;
        sample.s = s;
        sample.time_condition = max_abs_included(traj, r.time_condition - base.time_condition);
        sample.dynamics_condition = max_abs_included(traj, r.dynamics_condition - base.dynamics_condition);
        rep.samples.push_back(sample);
        s_used.push_back(s);
        time_defect.push_back(sample.time_condition);
        dyn_defect.push_back(sample.dynamics_condition);
    }
    if (s_used.empty())
        throw InvarianceError("check_invariance needs at least one non-zero s");

    rep.time_condition_order = fitted_order(s_used, time_defect);
    rep.dynamics_condition_order = fitted_order(s_used, dyn_defect);
    rep.time_condition_first_variation = first_variation(s_used, time_defect);
    rep.dynamics_condition_first_variation = first_variation(s_used, dyn_defect);
    rep.time_condition_holds =
        rep.time_condition_order >= 1.5 || rep.time_condition_first_variation <= rep.noise_floor;
    rep.dynamics_condition_holds =
        rep.dynamics_condition_order >= 1.5 || rep.dynamics_condition_first_variation <= rep.noise_floor;
    rep.invariant = rep.time_condition_holds && rep.dynamics_condition_holds;
    if (!rep.time_condition_holds)
        rep.reason = "time condition defect is first order in s";
    else if (!rep.dynamics_condition_holds)
        rep.reason = "dynamics condition defect is first order in s";
    return rep;
}

Eigen::VectorXd conserved_quantity(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult,
                                   const Generators& gen)
{
    Eigen::VectorXd q(traj.samples());
    for (int k = 0; k < traj.samples(); ++k) {
        const PhasePoint pt = traj.point(k);
        const LagrangianJet j = p.jet(pt, false);
        q(k) = mult.psi_z(k) * (j.dv.dot(gen.X.col(k)) - gen.Z(k) + (j.value - j.dv.dot(pt.v)) * gen.T(k));
    }
    return q;
}

Eigen::VectorXd georgieva_quantity(const HerglotzProblem& p, const Trajectory& traj, const Generators& gen)
{
    if (!gen.functional_free())
        throw InvarianceError("the Georgieva-Guenther quantity needs Z == 0");
    const Eigen::VectorXd I = cumulative_integral(traj.times(), functional_partial_samples(p, traj));
    Eigen::VectorXd q(traj.samples());
    for (int k = 0; k < traj.samples(); ++k) {
        const PhasePoint pt = traj.point(k);
        const LagrangianJet j = p.jet(pt, false);
        q(k) = std::exp(-I(k)) * (j.dv.dot(gen.X.col(k)) + (j.value - j.dv.dot(pt.v)) * gen.T(k));
    }
    return q;
}

double georgieva_scale(const HerglotzProblem& p, const Trajectory& traj)
{
    const Eigen::VectorXd I = cumulative_integral(traj.times(), functional_partial_samples(p, traj));
    return std::exp(I(I.size() - 1));
}

double xi_constancy_check(const Generators& gen, double z_b, double a, double b)
{
    if (!gen.xi)
        throw InvarianceError("xi is undefined for this family");
    const Eigen::Index m = gen.times.size();
    double variation = 0.0;
    double prev = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double q = (b - gen.times(k)) * *gen.xi - z_b / (b - a) * gen.T(k);
        if (k > 0)
            variation += std::abs(q - prev);
        prev = q;
    }
    return variation;
}

ConstancyVerdict constancy(const Eigen::VectorXd& samples, double tol)
{
    if (samples.size() == 0)
        throw ValidationError("constancy needs at least one sample");
    ConstancyVerdict v;
    v.mean = samples.mean();
    v.deviation = (samples.array() - v.mean).abs().maxCoeff();
    v.constant = v.deviation <= tol;
    return v;
}

FamilyAnalysis analyze_family(const HerglotzProblem& p, const TransformationFamily& fam, const Trajectory& traj,
                              const Multipliers& mult, double conservation_tol)
{
    FamilyAnalysis out;
    out.invariance = check_invariance(p, fam, traj);
    out.generators = generators(fam, traj);
    out.quantity = conserved_quantity(p, traj, mult, out.generators);
    out.conservation = constancy(out.quantity, conservation_tol);

    const double z_b = traj.functional()(traj.samples() - 1);
    out.xi_tolerance = 1e-8 * (1.0 + std::abs(z_b));
    if (out.generators.xi)
        out.xi_variation = xi_constancy_check(out.generators, z_b, p.a(), p.b());

    if (out.generators.functional_free() && is_uniform(traj.times())) {
        const Eigen::VectorXd q18 = georgieva_quantity(p, traj, out.generators);
        const double scale = georgieva_scale(p, traj);
        out.georgieva_scale = scale;
        double dev = 0.0;
        for (int k = 0; k < traj.samples(); ++k) {
            if (std::abs(q18(k)) > 1e-12)
                dev = std::max(dev, std::abs(out.quantity(k) / q18(k) - scale));
            else
                dev = std::max(dev, std::abs(out.quantity(k) - scale * q18(k)));
        }
        out.georgieva_ratio_deviation = dev;
    }

    out.passes = out.invariance.invariant && out.conservation.constant && out.xi_variation &&
                 *out.xi_variation <= out.xi_tolerance;
    return out;
}

} // namespace herglotz
