#include "herglotz/integrate.hpp"

#include <cmath>

namespace herglotz {

double simpson(std::span<const double> samples, double h)
{
    const std::size_t m = samples.size();
    if (m < 3 || m % 2 == 0)
        throw IntegrationError("simpson needs an odd number (>= 3) of samples, got " + std::to_string(m));
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t k = 1; k + 1 < m; ++k)
        (k % 2 == 1 ? odd : even) += samples[k];
    return h / 3.0 * (samples.front() + 4.0 * odd + 2.0 * even + samples.back());
}

double simpson(const Eigen::VectorXd& samples, double h)
{
    return simpson(std::span<const double>(samples.data(), static_cast<std::size_t>(samples.size())), h);
}

bool is_uniform(const Eigen::VectorXd& t)
{
    const Eigen::Index m = t.size();
    if (m < 2)
        return true;
    const double h = (t(m - 1) - t(0)) / static_cast<double>(m - 1);
    for (Eigen::Index k = 1; k < m; ++k)
        if (std::abs((t(k) - t(k - 1)) - h) > 1e-9 * std::abs(h))
            return false;
    return true;
}

Eigen::VectorXd cumulative_integral(const Eigen::VectorXd& t, const Eigen::VectorXd& f)
{
    const Eigen::Index m = t.size();
    if (m < 3 || f.size() != m)
        throw IntegrationError("cumulative_integral needs at least three matching samples");
    if (!is_uniform(t))
        throw IntegrationError("cumulative_integral needs a uniform mesh");
    const double h = (t(m - 1) - t(0)) / static_cast<double>(m - 1);
    Eigen::VectorXd out(m);
    out(0) = 0.0;
    for (Eigen::Index k = 1; k < m; ++k) {
        if (k % 2 == 0) {
            out(k) = out(k - 2) + h / 3.0 * (f(k - 2) + 4.0 * f(k - 1) + f(k));
        } else if (k >= 3) {
            // three-eighths rule over [t_{k-3}, t_k]
            out(k) = out(k - 3) + 3.0 * h / 8.0 * (f(k - 3) + 3.0 * f(k - 2) + 3.0 * f(k - 1) + f(k));
        } else if (m >= 4) {
            // cubic through t_0..t_3 integrated over [t_0, t_1]
            out(k) = h / 24.0 * (9.0 * f(0) + 19.0 * f(1) - 5.0 * f(2) + f(3));
        } else {
            out(k) = h / 12.0 * (5.0 * f(0) + 8.0 * f(1) - f(2));
        }
    }
    return out;
}

Eigen::VectorXd functional_partial_samples(const HerglotzProblem& p, const Trajectory& traj)
{
    const Expression& dz = p.partials().dz;
    Eigen::VectorXd out(traj.samples());
    for (int k = 0; k < traj.samples(); ++k)
        out(k) = evaluate(dz, environment_at(traj.point(k)));
    return out;
}

Multipliers compute_psi_z(const HerglotzProblem& p, const Trajectory& traj)
{
    validate_mesh(p, traj);
    const int N = traj.intervals();
    const int n = p.dimension();
    const LagrangianPartials& d = p.partials();
    const Eigen::VectorXd c = functional_partial_samples(p, traj);

    Multipliers m;
    m.psi_z.resize(N + 1);
    m.psi_z(N) = 1.0;
    const bool constant_zero = d.dz.is_constant(0.0);
    for (int k = N - 1; k >= 0; --k) {
        if (constant_zero) {
            m.psi_z(k) = 1.0;
            continue;
        }
        // psi' = -c(t) psi, one RK4 step from t_{k+1} back to t_k
        const double h = traj.times()(k) - traj.times()(k + 1);
        const double c_hi = c(k + 1);
        const double c_mid = evaluate(d.dz, environment_at(traj.midpoint(k, p)));
        const double c_lo = c(k);
        const double psi = m.psi_z(k + 1);
        const double k1 = -c_hi * psi;
        const double k2 = -c_mid * (psi + 0.5 * h * k1);
        const double k3 = -c_mid * (psi + 0.5 * h * k2);
        const double k4 = -c_lo * (psi + h * k3);
        m.psi_z(k) = psi + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        if (!std::isfinite(m.psi_z(k)))
            throw IntegrationError("psi_z became non-finite at t = " + std::to_string(traj.times()(k)));
    }

    m.psi_x.resize(n, N + 1);
    for (int k = 0; k <= N; ++k) {
        const Environment env = environment_at(traj.point(k));
        for (int i = 0; i < n; ++i)
            m.psi_x(i, k) = -m.psi_z(k) * evaluate(d.dv[i], env);
    }
    return m;
}

Eigen::VectorXd psi_z_by_quadrature(const HerglotzProblem& p, const Trajectory& traj)
{
    validate_mesh(p, traj);
    const Eigen::VectorXd I = cumulative_integral(traj.times(), functional_partial_samples(p, traj));
    const double total = I(I.size() - 1);
    return (total - I.array()).exp().matrix();
}

} // namespace herglotz
