#pragma once

#include "herglotz/errors.hpp"
#include "herglotz/problem.hpp"

#include <Eigen/Dense>

#include <span>
#include <sstream>
#include <string>

namespace herglotz {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform mesh and the states on it; column k of `y` is y(t(k)).
template <typename Scalar = double>
struct OdeSolution {
    VectorX<Scalar> t;
    MatrixX<Scalar> y;
};

namespace detail {

template <typename Scalar>
[[noreturn]] void throw_non_finite(Scalar t, const VectorX<Scalar>& y)
{
    std::ostringstream os;
    os.precision(17);
    os << "non-finite field value at t = " << t << ", y = [" << y.transpose() << "]";
    throw IntegrationError(os.str());
}

template <typename Scalar, typename Field>
VectorX<Scalar> checked_call(Field& field, Scalar t, const VectorX<Scalar>& y)
{
    VectorX<Scalar> dy = field(t, y);
    if (!dy.allFinite())
        throw_non_finite(t, y);
    return dy;
}

} // namespace detail

/// One classical Runge-Kutta step of size h (h may be negative).
/// `field(t, y)` returns y'.
template <typename Scalar, typename Field>
VectorX<Scalar> rk4_step(Field& field, Scalar t, const VectorX<Scalar>& y, Scalar h)
{
    const Scalar half = h / Scalar(2);
    const VectorX<Scalar> k1 = detail::checked_call(field, t, y);
    const VectorX<Scalar> k2 = detail::checked_call<Scalar>(field, t + half, y + half * k1);
    const VectorX<Scalar> k3 = detail::checked_call<Scalar>(field, t + half, y + half * k2);
    const VectorX<Scalar> k4 = detail::checked_call<Scalar>(field, t + h, y + h * k3);
    return y + (h / Scalar(6)) * (k1 + Scalar(2) * (k2 + k3) + k4);
}

/// Fixed-step RK4 from t0 to t1 in `steps` uniform steps; t1 < t0 integrates
/// backward. The last mesh time equals t1 exactly.
template <typename Scalar, typename Field>
OdeSolution<Scalar> rk4_ivp(Field&& field, Scalar t0, const VectorX<Scalar>& y0, Scalar t1, int steps)
{
    if (steps < 1)
        throw IntegrationError("rk4_ivp needs at least one step");
    if (!y0.allFinite())
        throw IntegrationError("non-finite initial state");
    const Scalar h = (t1 - t0) / Scalar(steps);
    OdeSolution<Scalar> sol;
    sol.t.resize(steps + 1);
    sol.y.resize(y0.size(), steps + 1);
    sol.t(0) = t0;
    sol.y.col(0) = y0;
    VectorX<Scalar> y = y0;
    for (int k = 0; k < steps; ++k) {
        const Scalar t = t0 + Scalar(k) * h;
        y = rk4_step<Scalar>(field, t, y, h);
        sol.t(k + 1) = k + 1 == steps ? t1 : t0 + Scalar(k + 1) * h;
        sol.y.col(k + 1) = y;
    }
    return sol;
}

/// Composite Simpson rule for samples at uniform spacing h. Needs an odd
/// number (>= 3) of samples.
double simpson(std::span<const double> samples, double h);
double simpson(const Eigen::VectorXd& samples, double h);

/// Running integral I_k = int_{t_0}^{t_k} f on a uniform mesh: Simpson at
/// even k, three-eighths rule at odd k. Exact on cubics from four samples on.
/// Needs at least three samples.
Eigen::VectorXd cumulative_integral(const Eigen::VectorXd& t, const Eigen::VectorXd& f);

/// True when the mesh spacing is constant to relative 1e-9.
bool is_uniform(const Eigen::VectorXd& t);

/// psi_z by backward RK4 of psi_z' = -psi_z dL/dz from psi_z(b) = 1 on the
/// trajectory mesh (stage values from Hermite midpoints), and
/// psi_x = -psi_z dL/dx'.
Multipliers compute_psi_z(const HerglotzProblem& p, const Trajectory& traj);

/// Cross-check route: psi_z(t_k) = exp(int_{t_k}^b dL/dz) with the integral
/// evaluated by quadrature of the sampled integrand. Needs a uniform mesh.
Eigen::VectorXd psi_z_by_quadrature(const HerglotzProblem& p, const Trajectory& traj);

/// Samples of dL/dz along the trajectory.
Eigen::VectorXd functional_partial_samples(const HerglotzProblem& p, const Trajectory& traj);

} // namespace herglotz
