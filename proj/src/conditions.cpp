#include "herglotz/conditions.hpp"

#include "herglotz/errors.hpp"

#include <cmath>

namespace herglotz {

Eigen::MatrixXd time_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& values)
{
    const Eigen::Index m = t.size();
    if (m < 3 || values.cols() != m)
        throw ValidationError("time_derivative needs at least three samples");
    Eigen::MatrixXd d(values.rows(), m);
    for (Eigen::Index k = 0; k < m; ++k) {
        // Lagrange interpolation weights of the derivative at t_k through
        const Eigen::Index i0 = k == 0 ? 0 : (k == m - 1 ? m - 3 : k - 1);
        const double x0 = t(i0), x1 = t(i0 + 1), x2 = t(i0 + 2), x = t(k);
        // nodes i0 < i1 < i2, written on differences so constants give exactly 0
        const double w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        const double w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        d.col(k) = w1 * (values.col(i0 + 1) - values.col(i0)) + w2 * (values.col(i0 + 2) - values.col(i0));
    }
    return d;
}

Eigen::VectorXd time_derivative(const Eigen::VectorXd& t, const Eigen::VectorXd& values)
{
    return time_derivative(t, Eigen::MatrixXd(values.transpose())).row(0).transpose();
}

namespace {

void require_resolution(const Trajectory& traj)
{
    if (traj.intervals() < 4)
        throw ValidationError("mesh too coarse: need at least 4 intervals, got " + std::to_string(traj.intervals()));
}

std::vector<bool> inclusion_mask(const Trajectory& traj)
{
    std::vector<bool> mask(traj.samples(), true);
    for (int k = 0; k < traj.samples(); ++k)
        mask[k] = !traj.near_breakpoint(k);
    return mask;
}

ResidualReport el_residual_impl(const HerglotzProblem& p, const Trajectory& traj, bool coupled, const char* name)
{
    validate_mesh(p, traj);
    require_resolution(traj);
    const int n = p.dimension();
    const int m = traj.samples();
    const Eigen::MatrixXd accel = time_derivative(traj.times(), traj.velocities());
    Eigen::MatrixXd r(n, m);
    for (int k = 0; k < m; ++k) {
        const PhasePoint pt = traj.point(k);
        const LagrangianJet j = p.jet(pt);
        const Eigen::VectorXd ddt_momentum =
            j.dv_dt + j.dv_dx * pt.v + j.dv_dv * accel.col(k) + j.dv_dz * j.value;
        Eigen::VectorXd res = j.dx - ddt_momentum;
        if (coupled)
            res += j.dz * j.dv;
        r.col(k) = res;
    }
    return ResidualReport::make(name, traj.times(), std::move(r), inclusion_mask(traj));
}

void require_multipliers(const Trajectory& traj, const Multipliers& mult)
{
    if (mult.psi_z.size() != traj.samples() || mult.psi_x.cols() != traj.samples() ||
        mult.psi_x.rows() != traj.dimension())
        throw ValidationError("multipliers are not on the trajectory mesh");
}

} // namespace

ResidualReport el_residual(const HerglotzProblem& p, const Trajectory& traj)
{
    return el_residual_impl(p, traj, true, "el");
}

ResidualReport classical_el_residual(const HerglotzProblem& p, const Trajectory& traj)
{
    if (!is_classical(p))
        throw ValidationError("classical Euler-Lagrange residual requested for a z-dependent Lagrangian");
    return el_residual_impl(p, traj, false, "classical-el");
}

double transversality_residual(const HerglotzProblem& p, const Trajectory& traj)
{
    validate_mesh(p, traj);
    const Environment env = environment_at(traj.point(traj.samples() - 1));
    double out = 0.0;
    for (const Expression& dv : p.partials().dv)
        out = std::max(out, std::abs(evaluate(dv, env)));
    return out;
}

Eigen::VectorXd dubois_reymond_bracket(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult)
{
    require_multipliers(traj, mult);
    Eigen::VectorXd out(traj.samples());
    for (int k = 0; k < traj.samples(); ++k) {
        const PhasePoint pt = traj.point(k);
        const LagrangianJet j = p.jet(pt, false);
        out(k) = mult.psi_z(k) * (j.value - j.dv.dot(pt.v));
    }
    return out;
}

ResidualReport dubois_reymond_residual(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult)
{
    validate_mesh(p, traj);
    require_resolution(traj);
    const Eigen::VectorXd bracket = dubois_reymond_bracket(p, traj, mult);
    const Eigen::VectorXd lhs = time_derivative(traj.times(), bracket);
    Eigen::MatrixXd r(1, traj.samples());
    for (int k = 0; k < traj.samples(); ++k)
        r(0, k) = lhs(k) - mult.psi_z(k) * evaluate(p.partials().dt, environment_at(traj.point(k)));
    return ResidualReport::make("dubois-reymond", traj.times(), std::move(r), inclusion_mask(traj));
}

std::vector<ResidualReport> pmp_residuals(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult)
{
    validate_mesh(p, traj);
    require_resolution(traj);
    require_multipliers(traj, mult);
    const int n = p.dimension();
    const int m = traj.samples();
    const Eigen::MatrixXd dpsi_x = time_derivative(traj.times(), mult.psi_x);
    const Eigen::VectorXd dpsi_z = time_derivative(traj.times(), mult.psi_z);

    Eigen::MatrixXd optimality(n, m), adjoint_x(n, m), adjoint_z(1, m);
    for (int k = 0; k < m; ++k) {
        const LagrangianJet j = p.jet(traj.point(k), false);
        optimality.col(k) = mult.psi_x.col(k) + mult.psi_z(k) * j.dv;
        adjoint_x.col(k) = dpsi_x.col(k) + mult.psi_z(k) * j.dx;
        adjoint_z(0, k) = dpsi_z(k) + mult.psi_z(k) * j.dz;
    }
    Eigen::MatrixXd endpoints(2, 1);
    endpoints(0, 0) = mult.psi_x.col(m - 1).cwiseAbs().maxCoeff();
    endpoints(1, 0) = std::abs(mult.psi_z(m - 1) - 1.0);
    Eigen::VectorXd tb(1);
    tb(0) = traj.times()(m - 1);

    const std::vector<bool> mask = inclusion_mask(traj);
    std::vector<ResidualReport> out;
    out.push_back(ResidualReport::make("pmp-optimality", traj.times(), std::move(optimality), mask));
    out.push_back(ResidualReport::make("pmp-adjoint-x", traj.times(), std::move(adjoint_x), mask));
    out.push_back(ResidualReport::make("pmp-adjoint-z", traj.times(), std::move(adjoint_z), mask));
    out.push_back(ResidualReport::make("pmp-endpoints", std::move(tb), std::move(endpoints)));
    return out;
}

Eigen::VectorXd hamiltonian(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult)
{
    require_multipliers(traj, mult);
    Eigen::VectorXd H(traj.samples());
    for (int k = 0; k < traj.samples(); ++k)
        H(k) = hamiltonian(p, traj.point(k), mult.psi_x.col(k), mult.psi_z(k));
    return H;
}

} // namespace herglotz
