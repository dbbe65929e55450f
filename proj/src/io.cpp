#include "herglotz/io.hpp"

#include "herglotz/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

namespace herglotz {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ValidationError(where + ": missing \"" + key + "\"");
    return obj.at(key);
}

double require_number(const json& v, const std::string& what)
{
    if (!v.is_number())
        throw ValidationError(what + " must be a number");
    return v.get<double>();
}

Expression parse_field(const json& v, const std::string& what)
{
    if (!v.is_string())
        throw ValidationError(what + " must be a string expression");
    try {
        return parse(v.get<std::string>());
    } catch (const ParseError& e) {
        throw ParseError(what + ": " + e.what(), e.offset());
    }
}

} // namespace

ProblemFile parse_problem_file(const json& doc)
{
    if (!doc.is_object())
        throw ValidationError("problem file must be a JSON object");
    const json& jn = require(doc, "n", "problem");
    if (!jn.is_number_integer() || jn.get<long long>() < 1)
        throw ValidationError("\"n\" must be a positive integer");
    const int n = static_cast<int>(jn.get<long long>());

    const json& interval = require(doc, "interval", "problem");
    if (!interval.is_array() || interval.size() != 2)
        throw ValidationError("\"interval\" must be [a, b]");
    const double a = require_number(interval[0], "interval[0]");
    const double b = require_number(interval[1], "interval[1]");

    const Expression L = parse_field(require(doc, "lagrangian", "problem"), "lagrangian");

    const json& jalpha = require(doc, "alpha", "problem");
    if (!jalpha.is_array())
        throw ValidationError("\"alpha\" must be an array");
    Eigen::VectorXd alpha(static_cast<Eigen::Index>(jalpha.size()));
    for (std::size_t i = 0; i < jalpha.size(); ++i)
        alpha(static_cast<Eigen::Index>(i)) = require_number(jalpha[i], "alpha[" + std::to_string(i) + "]");
    const double gamma = require_number(require(doc, "gamma", "problem"), "gamma");

    ProblemFile file{HerglotzProblem(n, a, b, L, alpha, gamma), {}};

    if (doc.contains("families")) {
        const json& fams = doc.at("families");
        if (!fams.is_array())
            throw ValidationError("\"families\" must be an array");
        for (std::size_t f = 0; f < fams.size(); ++f) {
            const json& jf = fams[f];
            const std::string where = "families[" + std::to_string(f) + "]";
            const json& jname = require(jf, "name", where);
            if (!jname.is_string())
                throw ValidationError(where + ".name must be a string");
            const std::string name = jname.get<std::string>();
            const Expression T = parse_field(require(jf, "T", where), where + ".T");
            const json& jx = require(jf, "X", where);
            if (!jx.is_array())
                throw ValidationError(where + ".X must be an array of " + std::to_string(n) + " expressions");
            std::vector<Expression> X;
            for (std::size_t i = 0; i < jx.size(); ++i)
                X.push_back(parse_field(jx[i], where + ".X[" + std::to_string(i) + "]"));
            const Expression Z = parse_field(require(jf, "Z", where), where + ".Z");
            std::optional<bool> expected;
            if (jf.contains("invariant")) {
                if (!jf.at("invariant").is_boolean())
                    throw ValidationError(where + ".invariant must be a boolean");
                expected = jf.at("invariant").get<bool>();
            }
            TransformationFamily fam(name, T, std::move(X), Z, expected);
            fam.validate(file.problem);
            file.families.push_back(std::move(fam));
        }
    }
    return file;
}

ProblemFile load_problem_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open problem file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("problem file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_problem_file(doc);
}

// ---------------------------------------------------------------------------
// Trajectory CSV

namespace {

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    for (auto& c : out) {
        const auto b = c.find_first_not_of(" \t\r");
        const auto e = c.find_last_not_of(" \t\r");
        c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
    }
    return out;
}

double parse_cell(const std::string& cell, int line)
{
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || cell.empty())
        throw ValidationError("trajectory CSV line " + std::to_string(line) + ": malformed number '" + cell + "'");
    return v;
}

} // namespace

Trajectory read_trajectory_csv(std::istream& in, int n)
{
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("trajectory CSV is empty");
    const std::vector<std::string> header = split_row(line);
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i)
        column[header[i]] = i;
    auto index_of = [&](const std::string& name) {
        auto it = column.find(name);
        if (it == column.end())
            throw ValidationError("trajectory CSV is missing column '" + name + "'");
        return it->second;
    };
    const std::size_t ct = index_of("t");
    const std::size_t cz = index_of("z");
    std::vector<std::size_t> cx, cv;
    for (int i = 1; i <= n; ++i) {
        cx.push_back(index_of("x" + std::to_string(i)));
        cv.push_back(index_of("dx" + std::to_string(i)));
    }

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const std::vector<std::string> cells = split_row(line);
        if (cells.size() != header.size())
            throw ValidationError("trajectory CSV line " + std::to_string(lineno) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells)
            row.push_back(parse_cell(c, lineno));
        rows.push_back(std::move(row));
    }
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd t(m), z(m);
    Eigen::MatrixXd x(n, m), v(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto& r = rows[static_cast<std::size_t>(k)];
        t(k) = r[ct];
        z(k) = r[cz];
        for (int i = 0; i < n; ++i) {
            x(i, k) = r[cx[i]];
            v(i, k) = r[cv[i]];
        }
    }
    return Trajectory(std::move(t), std::move(x), std::move(v), std::move(z));
}

Trajectory read_trajectory_csv(const std::filesystem::path& path, int n)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open trajectory file " + path.string());
    return read_trajectory_csv(in, n);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const Multipliers* mult)
{
    const int n = traj.dimension();
    out << "t";
    for (int i = 1; i <= n; ++i)
        out << ",x" << i;
    for (int i = 1; i <= n; ++i)
        out << ",dx" << i;
    out << ",z";
    if (mult != nullptr) {
        out << ",psi_z";
        for (int i = 1; i <= n; ++i)
            out << ",psi_x" << i;
    }
    out << '\n';
    for (int k = 0; k < traj.samples(); ++k) {
        out << format_number(traj.times()(k));
        for (int i = 0; i < n; ++i)
            out << ',' << format_number(traj.positions()(i, k));
        for (int i = 0; i < n; ++i)
            out << ',' << format_number(traj.velocities()(i, k));
        out << ',' << format_number(traj.functional()(k));
        if (mult != nullptr) {
            out << ',' << format_number(mult->psi_z(k));
            for (int i = 0; i < n; ++i)
                out << ',' << format_number(mult->psi_x(i, k));
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Reports

json number_or_string(double v)
{
    if (std::isfinite(v))
        return v;
    if (std::isnan(v))
        return "nan";
    return v > 0 ? "inf" : "-inf";
}

json to_json(const ResidualReport& r)
{
    json samples = json::array();
    for (Eigen::Index k = 0; k < r.values.cols(); ++k) {
        json row = json::array();
        for (Eigen::Index i = 0; i < r.values.rows(); ++i)
            row.push_back(number_or_string(r.values(i, k)));
        samples.push_back(json{{"t", r.times(k)}, {"residual", row}});
    }
    return json{{"name", r.name},
                {"max_abs", number_or_string(r.max_abs)},
                {"l2", number_or_string(r.l2)},
                {"skipped", r.skipped},
                {"samples", std::move(samples)}};
}

std::string to_csv(const ResidualReport& r)
{
    std::ostringstream out;
    out << "t";
    for (Eigen::Index i = 0; i < r.values.rows(); ++i)
        out << ",r" << (i + 1);
    out << '\n';
    for (Eigen::Index k = 0; k < r.values.cols(); ++k) {
        out << format_number(r.times(k));
        for (Eigen::Index i = 0; i < r.values.rows(); ++i)
            out << ',' << format_number(r.values(i, k));
        out << '\n';
    }
    return out.str();
}

json to_json(const InvarianceReport& r)
{
    json per_s = json::array();
    for (const auto& s : r.samples)
        per_s.push_back(json{{"s", s.s},
                             {"time_condition", number_or_string(s.time_condition)},
                             {"dynamics_condition", number_or_string(s.dynamics_condition)}});
    return json{{"family", r.family},
                {"xi", r.xi ? json(*r.xi) : json(nullptr)},
                {"per_s", std::move(per_s)},
                {"time_condition_order", number_or_string(r.time_condition_order)},
                {"dynamics_condition_order", number_or_string(r.dynamics_condition_order)},
                {"time_condition_first_variation", number_or_string(r.time_condition_first_variation)},
                {"dynamics_condition_first_variation", number_or_string(r.dynamics_condition_first_variation)},
                {"noise_floor", number_or_string(r.noise_floor)},
                {"time_condition_holds", r.time_condition_holds},
                {"dynamics_condition_holds", r.dynamics_condition_holds},
                {"invariant", r.invariant},
                {"reason", r.reason}};
}

json to_json(const FamilyAnalysis& a, const TransformationFamily& fam)
{
    json quantity = json::array();
    for (Eigen::Index k = 0; k < a.quantity.size(); ++k)
        quantity.push_back(number_or_string(a.quantity(k)));
    json out{{"family", fam.name()},
             {"expected_invariant", fam.expected_invariant() ? json(*fam.expected_invariant()) : json(nullptr)},
             {"invariance", to_json(a.invariance)},
             {"xi", a.generators.xi ? json(*a.generators.xi) : json(nullptr)},
             {"conserved_quantity",
              json{{"mean", number_or_string(a.conservation.mean)},
                   {"deviation", number_or_string(a.conservation.deviation)},
                   {"constant", a.conservation.constant},
                   {"samples", std::move(quantity)}}},
             {"xi_constancy",
              json{{"variation", a.xi_variation ? number_or_string(*a.xi_variation) : json(nullptr)},
                   {"tolerance", a.xi_tolerance}}},
             {"passes", a.passes}};
    if (a.georgieva_ratio_deviation)
        out["georgieva_comparison"] = json{{"scale", number_or_string(*a.georgieva_scale)},
                                           {"ratio_deviation", number_or_string(*a.georgieva_ratio_deviation)}};
    else
        out["georgieva_comparison"] = nullptr;
    return out;
}

} // namespace herglotz
