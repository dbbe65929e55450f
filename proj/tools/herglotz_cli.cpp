// Batch front-end: solve, check and noether pipelines over a problem file.
//
// Exit codes: 0 success, 1 input error, 2 solver non-convergence,
// 3 condition failure, 4 invariance failure.

#include "herglotz/conditions.hpp"
#include "herglotz/errors.hpp"
#include "herglotz/extremal.hpp"
#include "herglotz/integrate.hpp"
#include "herglotz/io.hpp"
#include "herglotz/noether.hpp"
#include "herglotz/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <algorithm>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace herglotz;

namespace {

enum ExitCode { ok = 0, input_error = 1, no_convergence = 2, condition_failure = 3, invariance_failure = 4 };

struct CommonFlags {
    std::string problem_file;
    int steps = 1000;
    double tol = 0.0;
    std::vector<double> guess;
    std::string out = ".";
    bool json_output = false;
};

struct SolverFailure {
    std::string message;
};

void add_common(CLI::App* cmd, CommonFlags& f, double default_tol, const std::string& tol_help)
{
    f.tol = default_tol;
    cmd->add_option("problem", f.problem_file, "Problem file (JSON)")->required();
    cmd->add_option("--steps", f.steps, "RK4 steps on [a, b]")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--tol", f.tol, tol_help)->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--guess", f.guess, "Initial velocity guess v1,...,vn (default 0)")->delimiter(',');
    cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
    cmd->add_flag("--json", f.json_output, "Print a single JSON document on standard output");
}

json flags_json(const CommonFlags& f)
{
    return json{{"problem", f.problem_file}, {"steps", f.steps}, {"tol", f.tol},
                {"guess", f.guess},          {"out", f.out},     {"json", f.json_output}};
}

Eigen::VectorXd initial_guess(const CommonFlags& f, int n)
{
    if (f.guess.empty())
        return Eigen::VectorXd::Zero(n);
    if (static_cast<int>(f.guess.size()) != n)
        throw ValidationError("--guess has " + std::to_string(f.guess.size()) + " entries, expected " +
                              std::to_string(n));
    return Eigen::Map<const Eigen::VectorXd>(f.guess.data(), n);
}

fs::path prepare_out(const CommonFlags& f)
{
    fs::path dir(f.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot write " + path.string());
    out << content;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json vector_json(const Eigen::VectorXd& v)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(number_or_string(v(i)));
    return out;
}

json shooting_json(const ShootingResult& r)
{
    json history = json::array();
    for (std::size_t i = 0; i < r.history.size(); ++i)
        history.push_back(json{{"iteration", i},
                               {"v", vector_json(r.history[i].v)},
                               {"residual_norm", number_or_string(r.history[i].residual_norm)}});
    json out{{"v_star", vector_json(r.v_star)},
             {"transversality_norm", number_or_string(r.transversality_norm)},
             {"iterations", r.iterations},
             {"converged", r.converged},
             {"history", std::move(history)}};
    if (r.trajectory.samples() > 0)
        out["z_b"] = number_or_string(r.trajectory.functional()(r.trajectory.samples() - 1));
    else
        out["z_b"] = nullptr;
    return out;
}

ShootingResult run_shooting(const HerglotzProblem& p, const CommonFlags& f, double newton_tol)
{
    ShootingOptions opt;
    opt.steps = f.steps;
    opt.tol = newton_tol;
    try {
        return shoot(p, initial_guess(f, p.dimension()), opt);
    } catch (const ShootingError& e) {
        throw SolverFailure{e.what()};
    } catch (const IrregularLagrangianError& e) {
        throw SolverFailure{e.what()};
    } catch (const IntegrationError& e) {
        throw SolverFailure{e.what()};
    }
}

// ---------------------------------------------------------------------------

int cmd_solve(const CommonFlags& f)
{
    const ProblemFile file = load_problem_file(f.problem_file);
    const ShootingResult r = run_shooting(file.problem, f, f.tol);
    const fs::path dir = prepare_out(f);

    json solution = shooting_json(r);
    solution["version"] = version;
    solution["flags"] = flags_json(f);
    write_file(dir / "solution.json", dump(solution));
    if (r.trajectory.samples() > 0) {
        std::ostringstream csv;
        write_trajectory_csv(csv, r.trajectory, r.converged ? &r.multipliers : nullptr);
        write_file(dir / "trajectory.csv", csv.str());
    }

    if (f.json_output) {
        std::cout << dump(solution);
    } else {
        for (std::size_t i = 0; i < r.history.size(); ++i)
            std::cout << "iteration " << i << ": |dL/ddx(b)| = " << format_number(r.history[i].residual_norm) << '\n';
        if (r.converged) {
            std::cout << "converged: v* = [";
            for (Eigen::Index i = 0; i < r.v_star.size(); ++i)
                std::cout << (i ? ", " : "") << format_number(r.v_star(i));
            std::cout << "], z(b) = " << format_number(r.trajectory.functional()(r.trajectory.samples() - 1)) << '\n';
        }
    }
    if (!r.converged) {
        std::cerr << "error: Newton iteration did not converge after " << r.iterations << " iterations\n";
        return no_convergence;
    }
    return ok;
}

struct CheckFlags {
    std::string from = "solve";
    std::string traj;
};

int cmd_check(const CommonFlags& f, const CheckFlags& cf)
{
    const ProblemFile file = load_problem_file(f.problem_file);
    const HerglotzProblem& p = file.problem;

    Trajectory traj;
    Multipliers mult;
    std::string source;
    if (!cf.traj.empty()) {
        traj = read_trajectory_csv(cf.traj, p.dimension());
        validate_mesh(p, traj);
        mult = compute_psi_z(p, traj);
        source = "traj";
    } else {
        const ShootingResult r = run_shooting(p, f, ShootingOptions{}.tol);
        if (!r.converged) {
            std::cerr << "error: Newton iteration did not converge after " << r.iterations << " iterations\n";
            return no_convergence;
        }
        traj = r.trajectory;
        mult = r.multipliers;
        source = "solve";
    }

    std::vector<ResidualReport> reports;
    reports.push_back(el_residual(p, traj));
    if (is_classical(p))
        reports.push_back(classical_el_residual(p, traj));
    const double transversality = transversality_residual(p, traj);
    reports.push_back(dubois_reymond_residual(p, traj, mult));
    for (auto& r : pmp_residuals(p, traj, mult))
        reports.push_back(std::move(r));

    const fs::path dir = prepare_out(f);
    json conditions = json::array();
    bool all_pass = true;
    auto add = [&](const std::string& name, double max_abs, json extra) {
        const bool pass = max_abs <= f.tol;
        all_pass = all_pass && pass;
        json entry{{"name", name}, {"max_abs", number_or_string(max_abs)}, {"pass", pass}};
        for (auto& [k, v] : extra.items())
            entry[k] = v;
        conditions.push_back(std::move(entry));
    };
    add(reports[0].name, reports[0].max_abs, json{{"l2", number_or_string(reports[0].l2)}, {"report", to_json(reports[0])}});
    std::size_t next = 1;
    if (is_classical(p)) {
        add(reports[1].name, reports[1].max_abs, json{{"l2", number_or_string(reports[1].l2)}, {"report", to_json(reports[1])}});
        next = 2;
    }
    add("transversality", transversality, json::object());
    for (std::size_t i = next; i < reports.size(); ++i)
        add(reports[i].name, reports[i].max_abs, json{{"l2", number_or_string(reports[i].l2)}, {"report", to_json(reports[i])}});
    for (const auto& r : reports)
        write_file(dir / ("residual_" + r.name + ".csv"), to_csv(r));

    const AdmissibilityReport adm = admissibility_residual(p, traj);
    json flags = flags_json(f);
    flags["from"] = cf.traj.empty() ? json(cf.from) : json(nullptr);
    flags["traj"] = cf.traj.empty() ? json(nullptr) : json(cf.traj);
    json doc{{"version", version},
             {"flags", std::move(flags)},
             {"source", source},
             {"admissibility",
              json{{"max_abs", number_or_string(adm.max_abs())},
                   {"tolerance", adm.tolerance},
                   {"admissible", adm.admissible()}}},
             {"conditions", std::move(conditions)},
             {"all_pass", all_pass}};
    write_file(dir / "checks.json", dump(doc));

    if (f.json_output) {
        std::cout << dump(doc);
    } else {
        for (const auto& c : doc["conditions"])
            std::cout << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
                      << "  max_abs = " << c["max_abs"].dump() << '\n';
        if (!adm.admissible())
            std::cout << "warning: trajectory is not admissible (defect " << format_number(adm.max_abs()) << ")\n";
    }
    return all_pass ? ok : condition_failure;
}

struct NoetherFlags {
    std::vector<std::string> families;
    bool all = false;
    std::string traj;
};

int cmd_noether(const CommonFlags& f, const NoetherFlags& nf)
{
    const ProblemFile file = load_problem_file(f.problem_file);
    const HerglotzProblem& p = file.problem;
    if (file.families.empty())
        throw ValidationError("problem file declares no transformation families");

    std::vector<const TransformationFamily*> selected;
    if (nf.families.empty() || nf.all) {
        for (const auto& fam : file.families)
            selected.push_back(&fam);
    } else {
        for (const auto& name : nf.families) {
            auto it = std::find_if(file.families.begin(), file.families.end(),
                                   [&](const TransformationFamily& fam) { return fam.name() == name; });
            if (it == file.families.end())
                throw ValidationError("no family named '" + name + "' in " + f.problem_file);
            selected.push_back(&*it);
        }
    }

    Trajectory traj;
    Multipliers mult;
    std::string source;
    if (!nf.traj.empty()) {
        traj = read_trajectory_csv(nf.traj, p.dimension());
        validate_mesh(p, traj);
        mult = compute_psi_z(p, traj);
        source = "traj";
    } else {
        const ShootingResult r = run_shooting(p, f, ShootingOptions{}.tol);
        if (!r.converged) {
            std::cerr << "error: Newton iteration did not converge after " << r.iterations << " iterations\n";
            return no_convergence;
        }
        traj = r.trajectory;
        mult = r.multipliers;
        source = "solve";
    }

    json families = json::array();
    bool expected_ok = true;
    std::vector<std::string> lines;
    for (const TransformationFamily* fam : selected) {
        const bool expected = fam->expected_invariant().value_or(true);
        try {
            const FamilyAnalysis a = analyze_family(p, *fam, traj, mult, f.tol);
            families.push_back(to_json(a, *fam));
            if (expected && !a.passes)
                expected_ok = false;
            std::ostringstream line;
            line << fam->name() << ": " << (a.invariance.invariant ? "invariant" : "not invariant")
                 << ", xi = " << (a.generators.xi ? format_number(*a.generators.xi) : std::string("undefined"))
                 << ", quantity = " << format_number(a.conservation.mean)
                 << ", deviation = " << format_number(a.conservation.deviation)
                 << (expected ? (a.passes ? "  [ok]" : "  [FAILED]") : "  [declared non-invariant]");
            lines.push_back(line.str());
        } catch (const InvarianceError& e) {
            families.push_back(json{{"family", fam->name()}, {"error", e.what()}, {"passes", false}});
            if (expected)
                expected_ok = false;
            lines.push_back(fam->name() + ": error: " + e.what());
        }
    }

    json flags = flags_json(f);
    flags["family"] = nf.families;
    flags["all"] = nf.all;
    flags["traj"] = nf.traj.empty() ? json(nullptr) : json(nf.traj);
    json doc{{"version", version},
             {"flags", std::move(flags)},
             {"source", source},
             {"z_b", traj.functional()(traj.samples() - 1)},
             {"families", std::move(families)},
             {"all_expected_pass", expected_ok}};
    const fs::path dir = prepare_out(f);
    write_file(dir / "noether.json", dump(doc));

    if (f.json_output) {
        std::cout << dump(doc);
    } else {
        for (const auto& l : lines)
            std::cout << l << '\n';
    }
    return expected_ok ? ok : invariance_failure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Solver and verifier for Herglotz variational problems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));

    CommonFlags solve_flags, check_flags, noether_flags;
    CheckFlags check_extra;
    NoetherFlags noether_extra;

    auto* solve = app.add_subcommand("solve", "Compute an extremal by shooting on the transversality condition");
    add_common(solve, solve_flags, 1e-10, "Newton tolerance on |dL/ddx(b)|");

    auto* check = app.add_subcommand("check", "Evaluate every necessary condition along a trajectory");
    add_common(check, check_flags, 1e-5, "Pass/fail tolerance on each residual");
    auto* from = check->add_option("--from", check_extra.from, "Trajectory source")
                     ->check(CLI::IsMember({"solve"}))
                     ->capture_default_str();
    check->add_option("--traj", check_extra.traj, "Trajectory CSV (t,x1..xn,dx1..dxn,z)")->excludes(from);

    auto* noether = app.add_subcommand("noether", "Check invariance and Noether conservation for declared families");
    add_common(noether, noether_flags, 1e-5, "Conservation tolerance");
    auto* fam = noether->add_option("--family", noether_extra.families, "Family name (repeatable)");
    noether->add_flag("--all", noether_extra.all, "All families in the file (default)")->excludes(fam);
    noether->add_option("--traj", noether_extra.traj, "Trajectory CSV instead of solving");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : input_error;
    }

    try {
        if (*solve)
            return cmd_solve(solve_flags);
        if (*check)
            return cmd_check(check_flags, check_extra);
        if (*noether)
            return cmd_noether(noether_flags, noether_extra);
    } catch (const SolverFailure& e) {
        std::cerr << "error: " << e.message << '\n';
        return no_convergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input_error;
    }
    return input_error;
}
