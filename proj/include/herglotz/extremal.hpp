#pragma once

#include "herglotz/problem.hpp"

#include <Eigen/Dense>

#include <vector>

namespace herglotz {

enum class Coupling {
    generalized, // keeps the dL/dz * dL/dx' term
    classical    // drops it
};

struct SecondOrderRate {
    Eigen::VectorXd acceleration; // x''
    double functional_rate = 0.0; // z' = L
};

/// The Euler-Lagrange equation solved for x'':
///
///   x'' = [d2L/dx'2]^{-1} ( dL/dx + dL/dz dL/dx' - d2L/dt dx' - d2L/dx dx' x'
///                           - d2L/dz dx' L )
///
/// with z' = L substituted. Throws IrregularLagrangianError when the
/// velocity Hessian has condition number above 1e12.
class EulerLagrangeField {
public:
    explicit EulerLagrangeField(const HerglotzProblem& p, Coupling coupling = Coupling::generalized);

    SecondOrderRate operator()(const PhasePoint& point) const;

    /// Right-hand side for the first-order state y = (x, x', z).
    Eigen::VectorXd state_rate(double t, const Eigen::VectorXd& y) const;

    const HerglotzProblem& problem() const { return problem_; }

private:
    HerglotzProblem problem_;
    Coupling coupling_;
};

EulerLagrangeField el_explicit_form(const HerglotzProblem& p);

struct ShootingOptions {
    int steps = 1000;
    double tol = 1e-10;
    int max_iter = 50;
};

struct NewtonIterate {
    Eigen::VectorXd v;
    double residual_norm = 0.0; // max-norm of dL/dx'(b)
};

struct ShootingResult {
    Eigen::VectorXd v_star;
    Trajectory trajectory;
    Multipliers multipliers;
    double transversality_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<NewtonIterate> history;
};

/// RK4 integration of the Euler-Lagrange system from (alpha, v0, gamma).
Trajectory integrate_extremal(const EulerLagrangeField& field, const Eigen::VectorXd& v0, int steps);

/// dL/dx' at the last sample.
Eigen::VectorXd terminal_momentum(const HerglotzProblem& p, const Trajectory& traj);

/// Newton iteration on v -> dL/dx'(b) with a forward-difference Jacobian.
///
/// Returns converged = false (with the iteration history) when Newton does
/// not reach `tol` within `max_iter` or the iterate leaves the region where
/// the flow is finite. Throws ShootingError on a singular Jacobian and
/// IrregularLagrangianError when the velocity Hessian degenerates.
ShootingResult shoot(const HerglotzProblem& p, const Eigen::VectorXd& guess, const ShootingOptions& options = {});

} // namespace herglotz
