#pragma once

#include "herglotz/expr.hpp"
#include "herglotz/report.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string_view>
#include <vector>

namespace herglotz {

/// One point (t, x, x', z) of an admissible pair.
struct PhasePoint {
    double t = 0.0;
    Eigen::VectorXd x;
    Eigen::VectorXd v;
    double z = 0.0;
};

/// Environment binding t, x1..xn, dx1..dxn, z from a phase point.
Environment environment_at(const PhasePoint& p);

/// Symbolic partials of L, built once per problem.
struct LagrangianPartials {
    Expression L;
    Expression dt, dz;
    std::vector<Expression> dx, dv;               // dL/dx_i, dL/ddx_i
    std::vector<Expression> dv_dt, dv_dz;         // d2L/dt ddx_i, d2L/dz ddx_i
    std::vector<std::vector<Expression>> dv_dx;   // [i][j] = d2L/dx_j ddx_i
    std::vector<std::vector<Expression>> dv_dv;   // [i][j] = d2L/ddx_j ddx_i
};

/// L and its partials evaluated at one point.
struct LagrangianJet {
    double value = 0.0;
    double dt = 0.0;
    double dz = 0.0;
    Eigen::VectorXd dx, dv;
    Eigen::VectorXd dv_dt, dv_dz;
    Eigen::MatrixXd dv_dx, dv_dv; // (i, j) = d2L/dx_j ddx_i, d2L/ddx_j ddx_i
};

/// z(b) -> extr subject to z' = L(t, x, x', z), x(a) = alpha, z(a) = gamma.
class HerglotzProblem {
public:
    /// Throws ValidationError on a >= b, a dimension mismatch, or a
    /// Lagrangian referencing symbols outside {t, x1..xn, dx1..dxn, z}.
    HerglotzProblem(int n, double a, double b, Expression lagrangian, Eigen::VectorXd alpha,
                    double gamma);

    int dimension() const { return n_; }
    double a() const { return a_; }
    double b() const { return b_; }
    const Expression& lagrangian() const { return partials_->L; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double gamma() const { return gamma_; }
    const LagrangianPartials& partials() const { return *partials_; }

    double lagrangian_at(const PhasePoint& p) const;

    /// First-order partials always; second-order ones when `second_order`.
    LagrangianJet jet(const PhasePoint& p, bool second_order = true) const;

private:
    int n_;
    double a_, b_;
    Eigen::VectorXd alpha_;
    double gamma_;
    std::shared_ptr<const LagrangianPartials> partials_;
};

HerglotzProblem make_problem(int n, double a, double b, const Expression& lagrangian,
                             const Eigen::VectorXd& alpha, double gamma);
HerglotzProblem make_problem(int n, double a, double b, std::string_view lagrangian,
                             const Eigen::VectorXd& alpha, double gamma);

/// True iff `z` does not occur in the parsed Lagrangian. The test is
/// structural: "z - z" counts as z-dependent.
bool is_classical(const HerglotzProblem& p);

/// The optimal-control view of a Herglotz problem: state (x, z), control
/// u = x' in R^n, dynamics x' = u and z' = L(t, x, u, z), payoff z, no
/// running cost. The control u_i is carried by the symbol dx_i.
struct OCForm {
    int state_dim = 0;
    int control_dim = 0;
    std::vector<Expression> dynamics; // g_1..g_n = u_i, g_{n+1} = L
    Expression payoff;                // phi(x, z) = z
    Expression running_cost;          // f = 0

    /// dg/dz component-wise.
    std::vector<Expression> dynamics_z_partials() const;
};

OCForm to_optimal_control(const HerglotzProblem& p);

/// H(t, x, u, z, psi_x, psi_z) = psi_x . u + psi_z L.
double hamiltonian(const HerglotzProblem& p, const PhasePoint& point, const Eigen::VectorXd& psi_x,
                   double psi_z);

/// Sampled admissible-pair candidate on a mesh a = t_0 < ... < t_N = b.
///
/// Column k of `positions()` / `velocities()` is x(t_k) / x'(t_k).
/// Breakpoints are sample indices where x' may jump.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(Eigen::VectorXd times, Eigen::MatrixXd positions, Eigen::MatrixXd velocities,
               Eigen::VectorXd functional, std::vector<int> breakpoints = {});

    int samples() const { return static_cast<int>(times_.size()); }
    int intervals() const { return samples() - 1; }
    int dimension() const { return static_cast<int>(positions_.rows()); }

    const Eigen::VectorXd& times() const { return times_; }
    const Eigen::MatrixXd& positions() const { return positions_; }
    const Eigen::MatrixXd& velocities() const { return velocities_; }
    const Eigen::VectorXd& functional() const { return functional_; }
    const std::vector<int>& breakpoints() const { return breakpoints_; }

    PhasePoint point(int k) const;

    /// Cubic Hermite reconstruction at the midpoint of interval [t_k, t_{k+1}];
    /// z uses z' = L at both ends.
    PhasePoint midpoint(int k, const HerglotzProblem& p) const;

    /// Sample k lies within one mesh interval of a breakpoint.
    bool near_breakpoint(int k) const;

private:
    Eigen::VectorXd times_;
    Eigen::MatrixXd positions_, velocities_;
    Eigen::VectorXd functional_;
    std::vector<int> breakpoints_;
};

/// Throws ValidationError unless the mesh spans [a, b] exactly and the
/// dimension matches.
void validate_mesh(const HerglotzProblem& p, const Trajectory& traj);

/// Costates on the mesh of a trajectory.
struct Multipliers {
    Eigen::MatrixXd psi_x; // n x (N+1)
    Eigen::VectorXd psi_z;
};

struct AdmissibilityReport {
    ResidualReport dynamics; // per interval: (z_{k+1} - z_k - int L dt) / (t_{k+1} - t_k)
    double initial_x_defect = 0.0;
    double initial_z_defect = 0.0;
    double tolerance = 0.0;

    double max_abs() const;
    bool admissible() const { return max_abs() <= tolerance; }
};

/// 1e-8 * (1 + |gamma| + max |z_k|).
double default_admissibility_tolerance(const HerglotzProblem& p, const Trajectory& traj);

AdmissibilityReport admissibility_residual(const HerglotzProblem& p, const Trajectory& traj);
AdmissibilityReport admissibility_residual(const HerglotzProblem& p, const Trajectory& traj,
                                           double tolerance);

/// Per-interval integrals of L along the trajectory (Simpson with Hermite midpoints).
Eigen::VectorXd interval_integrals(const HerglotzProblem& p, const Trajectory& traj);

} // namespace herglotz
