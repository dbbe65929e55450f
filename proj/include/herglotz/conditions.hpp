#pragma once

#include "herglotz/problem.hpp"
#include "herglotz/report.hpp"

#include <Eigen/Dense>

#include <vector>

namespace herglotz {

/// d/dt of sampled values on an arbitrary increasing mesh: three-point
/// central stencil inside, second-order one-sided stencils at both ends.
/// Each row of `values` is differentiated independently.
Eigen::MatrixXd time_derivative(const Eigen::VectorXd& t, const Eigen::MatrixXd& values);
Eigen::VectorXd time_derivative(const Eigen::VectorXd& t, const Eigen::VectorXd& values);

/// dL/dx - d/dt(dL/dx') + dL/dz dL/dx', with d/dt(dL/dx') expanded by the
/// chain rule and x'' taken from differences of the sampled velocities.
ResidualReport el_residual(const HerglotzProblem& p, const Trajectory& traj);

/// Same residual without the dL/dz coupling; only for classical problems.
ResidualReport classical_el_residual(const HerglotzProblem& p, const Trajectory& traj);

/// max-norm of dL/dx' at t = b.
double transversality_residual(const HerglotzProblem& p, const Trajectory& traj);

/// Samples of psi_z (L - dL/dx' . x').
Eigen::VectorXd dubois_reymond_bracket(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult);

/// d/dt[psi_z (L - dL/dx' . x')] - psi_z dL/dt.
ResidualReport dubois_reymond_residual(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult);

/// Four reports, in order:
///   pmp-optimality  psi_x + psi_z dL/dx'
///   pmp-adjoint-x   psi_x' + psi_z dL/dx
///   pmp-adjoint-z   psi_z' + psi_z dL/dz
///   pmp-endpoints   (|psi_x(b)|, |psi_z(b) - 1|) at t = b
std::vector<ResidualReport> pmp_residuals(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult);

/// H_k = psi_x . x' + psi_z L along the samples.
Eigen::VectorXd hamiltonian(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult);

} // namespace herglotz
