#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace herglotz {

/// Pointwise values of one named residual along a mesh.
///
/// `values` holds one column per sample and one row per component. Samples
/// with `included[k] == false` (breakpoint windows) are kept for output but
/// excluded from the norms and counted in `skipped`.
struct ResidualReport {
    std::string name;
    Eigen::VectorXd times;
    Eigen::MatrixXd values;
    std::vector<bool> included;
    double max_abs = 0.0;
    double l2 = 0.0; // root mean square over included entries
    int skipped = 0;

    /// Builds a report and computes the norms. An empty `included` means all.
    static ResidualReport make(std::string name, Eigen::VectorXd times, Eigen::MatrixXd values,
                               std::vector<bool> included = {});
};

} // namespace herglotz
