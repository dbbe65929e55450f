#pragma once

#include "herglotz/expr.hpp"
#include "herglotz/problem.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace herglotz {

/// One-parameter family h^s(t, x, z) = (T^s, X^s, Z^s). The maps are
/// expressions over t, x_i, dx_i, z and the parameter s, and must reduce to
/// the identity at s = 0. Invertibility is assumed, not checked.
class TransformationFamily {
public:
    TransformationFamily(std::string name, Expression time_map, std::vector<Expression> position_maps,
                         Expression functional_map, std::optional<bool> expected_invariant = std::nullopt);

    const std::string& name() const { return name_; }
    const Expression& time_map() const { return time_map_; }
    const std::vector<Expression>& position_maps() const { return position_maps_; }
    const Expression& functional_map() const { return functional_map_; }
    /// Declared in the problem file; nullopt when the file says nothing.
    std::optional<bool> expected_invariant() const { return expected_invariant_; }

    /// Alphabet and dimension checks plus the identity at s = 0 on 20
    /// pseudo-random points (fixed seed) to 1e-12. Throws ValidationError.
    void validate(const HerglotzProblem& p) const;

private:
    std::string name_;
    Expression time_map_;
    std::vector<Expression> position_maps_;
    Expression functional_map_;
    std::optional<bool> expected_invariant_;
};

/// s-derivatives of the maps at s = 0, sampled along a trajectory.
struct Generators {
    Eigen::VectorXd times;
    Eigen::VectorXd T;
    Eigen::MatrixXd X; // n x (N+1)
    Eigen::VectorXd Z;
    std::optional<double> xi;       // undefined when dT/dt is not constant in t
    double time_rate_variation = 0; // max - min of dT/dt over the mesh

    bool functional_free() const { return (Z.array() == 0.0).all(); }
};

/// Evaluates T, X, Z and estimates xi = -(z(b)/(b-a)) dT/dt, which is
/// required to be t-constant to within 1e-8.
Generators generators(const TransformationFamily& fam, const Trajectory& traj);

struct InvarianceSample {
    double s = 0.0;
    double time_condition = 0.0;     // max |R_time(s) - R_time(0)|
    double dynamics_condition = 0.0; // max |R_dyn(s) - R_dyn(0)|
};

struct InvarianceReport {
    std::string family;
    std::optional<double> xi;
    std::vector<InvarianceSample> samples;
    double time_condition_order = 0.0;
    double dynamics_condition_order = 0.0;
    double time_condition_first_variation = 0.0;
    double dynamics_condition_first_variation = 0.0;
    double noise_floor = 0.0;
    bool time_condition_holds = false;
    bool dynamics_condition_holds = false;
    bool invariant = false;
    std::string reason;
};

std::vector<double> default_s_values();

/// Pointwise residuals of the two invariance conditions
///   R_time(s) = (z(b)/(b-a) + xi s) dT^s/dt - z(b)/(b-a)
///   R_dyn(s)  = dZ^s/dt - L(T^s, X^s, dX^s/dT^s, Z^s) dT^s/dt
/// with d/dt by finite differences along the trajectory. Each is compared
/// with its value at s = 0 (the discretization floor of the identity map),
/// and a condition holds when the remaining defect is o(s): either its
/// fitted order in s is at least 1.5, or its first variation defect/|s| is
/// no larger than the noise floor 1e-8 + 10 max(|R_time(0)|, |R_dyn(0)|).
/// Throws InvarianceError when dT^s/dt <= 0 somewhere.
InvarianceReport check_invariance(const HerglotzProblem& p, const TransformationFamily& fam, const Trajectory& traj,
                                  const std::vector<double>& s_values = default_s_values());

/// psi_z [dL/dx' . X - Z + (L - dL/dx' . x') T] along the samples.
Eigen::VectorXd conserved_quantity(const HerglotzProblem& p, const Trajectory& traj, const Multipliers& mult,
                                   const Generators& gen);

/// lambda(t) [dL/dx' . X + (L - dL/dx' . x') T] with
/// lambda(t) = exp(-int_a^t dL/dz). Requires Z == 0 and a uniform mesh.
Eigen::VectorXd georgieva_quantity(const HerglotzProblem& p, const Trajectory& traj, const Generators& gen);

/// exp(int_a^b dL/dz) along the trajectory, the factor relating the two
/// conserved quantities when Z == 0.
double georgieva_scale(const HerglotzProblem& p, const Trajectory& traj);

/// Total variation of (b - t) xi - z(b)/(b-a) T(t) over the mesh.
double xi_constancy_check(const Generators& gen, double z_b, double a, double b);

struct ConstancyVerdict {
    bool constant = false;
    double deviation = 0.0; // max |sample - mean|
    double mean = 0.0;
};

ConstancyVerdict constancy(const Eigen::VectorXd& samples, double tol);

/// Everything the noether pipeline reports for one family.
struct FamilyAnalysis {
    InvarianceReport invariance;
    Generators generators;
    Eigen::VectorXd quantity;
    ConstancyVerdict conservation;
    std::optional<double> georgieva_ratio_deviation; // max |conserved / georgieva - scale|, when Z == 0
    std::optional<double> georgieva_scale;
    std::optional<double> xi_variation;
    double xi_tolerance = 0.0;
    bool passes = false; // invariant, conserved at tol, xi-constancy within tolerance
};

FamilyAnalysis analyze_family(const HerglotzProblem& p, const TransformationFamily& fam, const Trajectory& traj,
                              const Multipliers& mult, double conservation_tol);

} // namespace herglotz
