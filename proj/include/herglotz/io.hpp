#pragma once

#include "herglotz/noether.hpp"
#include "herglotz/problem.hpp"
#include "herglotz/report.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace herglotz {

/// Contents of a problem file:
///
///   { "n": 1, "interval": [0.0, 1.0], "lagrangian": "dx1^2/2 - x1",
///     "alpha": [1.0], "gamma": 0.0,
///     "families": [ { "name": "time-shift", "T": "t + s", "X": ["x1"], "Z": "z",
///                     "invariant": true } ] }
///
/// "families" and each family's "invariant" flag are optional.
struct ProblemFile {
    HerglotzProblem problem;
    std::vector<TransformationFamily> families;
};

/// Throws ValidationError (or ParseError for a malformed expression).
ProblemFile parse_problem_file(const nlohmann::json& doc);
ProblemFile load_problem_file(const std::filesystem::path& path);

/// Reads a trajectory CSV with header `t,x1..xn,dx1..dxn,z`. Columns are
/// matched by name; extra columns (psi_z, psi_x1, ...) are ignored.
Trajectory read_trajectory_csv(std::istream& in, int n);
Trajectory read_trajectory_csv(const std::filesystem::path& path, int n);

/// Writes `t,x1..xn,dx1..dxn,z` and, when given, `psi_z,psi_x1..psi_xn`.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Multipliers* mult = nullptr);

nlohmann::json to_json(const ResidualReport& r);

/// `t,r1..rm` rows for the samples of a report.
std::string to_csv(const ResidualReport& r);

nlohmann::json to_json(const InvarianceReport& r);
nlohmann::json to_json(const FamilyAnalysis& a, const TransformationFamily& fam);

/// Finite values as numbers, non-finite ones as strings ("inf", "-inf", "nan").
nlohmann::json number_or_string(double v);

} // namespace herglotz
