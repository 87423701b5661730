#pragma once

// Command-line front end: spectrum, wavefunction, turning-points and verify.
// Energies and parameters are in the scaled units of the library (hbar^2/2M
// factors absorbed: the radial equation reads f'' + (2 eps + alpha/r - ...) f = 0).

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heunqes/errors.hpp"
#include "heunqes/model.hpp"
#include "heunqes/oracle.hpp"
#include "heunqes/quantize.hpp"
#include "heunqes/verify.hpp"

namespace heunqes::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kSolverError = 3, kVerificationFailure = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inclusive integer range, written "a" or "a..b".
struct IntRange {
    int first = 0;
    int last = 0;

    static IntRange parse(const std::string& text) {
        const auto dots = text.find("..");
        try {
            std::size_t used = 0;
            if (dots == std::string::npos) {
                const int v = std::stoi(text, &used);
                if (used != text.size()) throw std::invalid_argument(text);
                return {v, v};
            }
            const std::string lo = text.substr(0, dots), hi = text.substr(dots + 2);
            IntRange r{std::stoi(lo, &used), 0};
            if (used != lo.size()) throw std::invalid_argument(text);
            r.last = std::stoi(hi, &used);
            if (used != hi.size()) throw std::invalid_argument(text);
            return r;
        } catch (const std::logic_error&) {
            throw ConfigError("malformed range '" + text + "' (expected N or A..B)");
        }
    }

    std::string str() const { return first == last ? std::to_string(first) : std::to_string(first) + ".." + std::to_string(last); }
    bool single() const { return first == last; }
};

struct RunConfig {
    std::string command;
    IntRange n;
    IntRange l;
    double alpha = 0.0;
    double k = 1.0;
    double beta = 0.0;
    double epsilon = 0.0;
    std::optional<int> gridPoints;
    std::optional<double> rMin;
    std::optional<double> rMax;
    double tol = 1e-5;
    bool verify = false;
    std::string format = "csv";
    std::string out;
    int branch = 0;
    int samples = 200;
    int degreeCap = kDefaultDegreeCap;

    void validate() const {
        static const std::vector<std::string> commands{"spectrum", "wavefunction", "turning-points", "verify"};
        if (std::find(commands.begin(), commands.end(), command) == commands.end())
            throw ConfigError("unknown or missing command '" + command + "'");
        if (n.first > n.last || l.first > l.last) throw ConfigError("ranges must be non-empty (A..B with A <= B)");
        if (n.first < 0 || l.first < 0) throw ConfigError("n and l must be non-negative");
        if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("k must be positive");
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be non-negative");
        if (!std::isfinite(beta) || !std::isfinite(epsilon)) throw ConfigError("beta and epsilon must be finite");
        if (!(tol > 0.0)) throw ConfigError("tolerances must be positive");
        if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
        if (gridPoints && *gridPoints < 16) throw ConfigError("grid-points must be at least 16");
        if (rMin && !(*rMin > 0.0)) throw ConfigError("r-min must be positive");
        if (rMin && rMax && !(*rMax > *rMin)) throw ConfigError("r-max must exceed r-min");
        if (branch < 0) throw ConfigError("branch must be non-negative");
        if (samples < 3) throw ConfigError("samples must be at least 3");
        if (degreeCap < 0) throw ConfigError("degree-cap must be non-negative");
        if (command == "wavefunction" && (!n.single() || !l.single()))
            throw ConfigError("wavefunction needs a single n and l");
        if (command == "turning-points" && !l.single()) throw ConfigError("turning-points needs a single l");
    }
};

using nlohmann::json;

inline json to_json(const RunConfig& c) {
    auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };
    return json{{"command", c.command},   {"n", c.n.str()},
                {"l", c.l.str()},         {"alpha", c.alpha},
                {"k", c.k},               {"beta", c.beta},
                {"epsilon", c.epsilon},   {"grid_points", opt(c.gridPoints)},
                {"r_min", opt(c.rMin)},   {"r_max", opt(c.rMax)},
                {"tol", c.tol},           {"verify", c.verify},
                {"format", c.format},     {"out", c.out},
                {"branch", c.branch},     {"samples", c.samples},
                {"degree_cap", c.degreeCap}};
}

/// Reads a config object; an output document's embedded "config" is accepted too.
inline RunConfig from_json(const json& doc) {
    const json& j = doc.contains("config") && doc["config"].is_object() ? doc["config"] : doc;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    try {
        auto range = [&](const char* key, IntRange& dst) {
            if (!j.contains(key)) return;
            const auto& v = j[key];
            dst = v.is_number_integer() ? IntRange{v.get<int>(), v.get<int>()} : IntRange::parse(v.get<std::string>());
        };
        auto number = [&](const char* key, auto& dst) {
            if (j.contains(key) && !j[key].is_null()) dst = j[key].get<std::decay_t<decltype(dst)>>();
        };
        auto optional = [&](const char* key, auto& dst) {
            if (j.contains(key) && !j[key].is_null()) dst = j[key].get<typename std::decay_t<decltype(dst)>::value_type>();
        };
        number("command", c.command);
        range("n", c.n);
        range("l", c.l);
        number("alpha", c.alpha);
        number("k", c.k);
        number("beta", c.beta);
        number("epsilon", c.epsilon);
        optional("grid_points", c.gridPoints);
        optional("r_min", c.rMin);
        optional("r_max", c.rMax);
        number("tol", c.tol);
        number("verify", c.verify);
        number("format", c.format);
        number("out", c.out);
        number("branch", c.branch);
        number("samples", c.samples);
        number("degree_cap", c.degreeCap);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

/// Parses argv; values from --config are read first and explicit flags override them.
/// Returns nothing when help was requested (the help text goes to `helpOut`).
inline std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& helpOut = std::cout) {
    CLI::App app{"Quasi-exact bound states of U = -alpha/r + beta r + k r^2 (scaled units)"};
    std::string command, nText, lText, configPath;
    RunConfig flags;
    int gridPoints = 0;
    double rMin = 0.0, rMax = 0.0;
    app.add_option("command", command, "spectrum | wavefunction | turning-points | verify");
    app.add_option("--config", configPath, "JSON config file (flags take precedence)");
    app.add_option("--n", nText, "polynomial degree, N or A..B");
    app.add_option("--l", lText, "angular momentum, N or A..B");
    app.add_option("--alpha", flags.alpha, "Coulomb strength");
    app.add_option("--k", flags.k, "harmonic coefficient");
    app.add_option("--beta", flags.beta, "linear coefficient (turning-points only)");
    app.add_option("--epsilon", flags.epsilon, "energy (turning-points only)");
    app.add_option("--grid-points", gridPoints, "oracle grid points");
    app.add_option("--r-min", rMin, "oracle inner wall");
    app.add_option("--r-max", rMax, "oracle outer wall");
    app.add_option("--tol", flags.tol, "relative oracle tolerance");
    app.add_flag("--verify", flags.verify, "confirm energies with the finite-difference oracle");
    app.add_option("--format", flags.format, "csv or json");
    app.add_option("--out", flags.out, "output path (default stdout)");
    app.add_option("--branch", flags.branch, "root index for wavefunction (ascending b)");
    app.add_option("--samples", flags.samples, "approximate rows for wavefunction output");
    app.add_option("--degree-cap", flags.degreeCap, "largest accepted n");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        helpOut << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    RunConfig cfg;
    if (!configPath.empty()) {
        std::ifstream in(configPath);
        if (!in) throw ConfigError("cannot open config file " + configPath);
        try {
            cfg = from_json(json::parse(in));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
    }
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (!command.empty()) cfg.command = command;
    if (given("--n")) cfg.n = IntRange::parse(nText);
    if (given("--l")) cfg.l = IntRange::parse(lText);
    if (given("--alpha")) cfg.alpha = flags.alpha;
    if (given("--k")) cfg.k = flags.k;
    if (given("--beta")) cfg.beta = flags.beta;
    if (given("--epsilon")) cfg.epsilon = flags.epsilon;
    if (given("--grid-points")) cfg.gridPoints = gridPoints;
    if (given("--r-min")) cfg.rMin = rMin;
    if (given("--r-max")) cfg.rMax = rMax;
    if (given("--tol")) cfg.tol = flags.tol;
    if (given("--verify")) cfg.verify = flags.verify;
    if (given("--format")) cfg.format = flags.format;
    if (given("--out")) cfg.out = flags.out;
    if (given("--branch")) cfg.branch = flags.branch;
    if (given("--samples")) cfg.samples = flags.samples;
    if (given("--degree-cap")) cfg.degreeCap = flags.degreeCap;
    cfg.validate();
    return cfg;
}

namespace detail {

inline std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// A table written either as CSV or as a JSON results array.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "");
                const auto& v = row[i];
                if (v.is_null())
                    os << "nan";
                else if (v.is_number_float())
                    os << num(v.get<double>());
                else if (v.is_string())
                    os << v.get<std::string>();
                else
                    os << v.dump();
            }
            os << '\n';
        }
    }

    json to_json() const {
        json arr = json::array();
        for (const auto& row : rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
            arr.push_back(std::move(obj));
        }
        return arr;
    }
};

inline void emit(const RunConfig& cfg, const Table& table, const json& diagnostics, std::ostream& stdoutStream) {
    std::ofstream file;
    if (!cfg.out.empty()) {
        file.open(cfg.out, std::ios::binary | std::ios::trunc);
        if (!file) throw ConfigError("cannot open output file " + cfg.out);
    }
    std::ostream& os = cfg.out.empty() ? stdoutStream : file;
    if (cfg.format == "json") {
        const json doc{{"config", to_json(cfg)}, {"results", table.to_json()}, {"diagnostics", diagnostics}};
        os << doc.dump(2) << '\n';
    } else {
        table.write_csv(os);
    }
}

inline RadialGrid grid_for(const RunConfig& cfg, const PhysicalSystem& sys, double epsilon) {
    RadialGrid g = auto_grid(sys, epsilon, cfg.gridPoints.value_or(kDefaultGridPoints));
    return RadialGrid(cfg.rMin.value_or(g.rMin), cfg.rMax.value_or(g.rMax), g.points);
}

inline int levels_needed(const PhysicalSystem& sys, const RadialGrid& grid, double epsilon) {
    const std::size_t below = levels_below(sys, grid, epsilon + 0.5 * std::max(1.0, std::abs(epsilon)));
    return static_cast<int>(std::min<std::size_t>(below + 1, static_cast<std::size_t>(grid.points - 2)));
}

inline SolveOptions solve_options(const RunConfig& cfg) { return SolveOptions{cfg.degreeCap, false}; }

inline int run_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    struct Entry {
        FamilyResult family;
    };
    std::vector<std::future<Entry>> jobs;
    for (int n = cfg.n.first; n <= cfg.n.last; ++n)
        for (int l = cfg.l.first; l <= cfg.l.last; ++l)
            jobs.push_back(std::async(std::launch::async, [&cfg, n, l] {
                Entry e{solve_family(n, l, cfg.alpha, cfg.k, solve_options(cfg))};
                if (cfg.verify) {
                    for (auto& sol : e.family.solutions) {
                        const auto sys = sol.system();
                        const auto grid = grid_for(cfg, sys, sol.epsilon);
                        const auto res = fd_eigensolve_richardson(sys, grid, levels_needed(sys, grid, sol.epsilon));
                        if (const auto m = match_energy(res, sol.epsilon, cfg.tol)) {
                            sol.residuals.oracleGap = m->gap;
                            sol.residuals.oracleIndex = m->index;
                            sol.residuals.nodeCount = res.nodeCounts[static_cast<std::size_t>(m->index)];
                        }
                    }
                }
                return e;
            }));

    Table table;
    table.columns = {"n", "l", "branch", "b", "beta", "epsilon", "constraint_residual", "ode_residual"};
    if (cfg.verify) table.columns.insert(table.columns.end(), {"oracle_gap", "oracle_index", "node_count"});
    int discarded = 0, unmatched = 0;
    json warnings = json::array();
    for (auto& job : jobs) {
        const Entry e = job.get();
        discarded += e.family.discardedComplexRoots;
        for (const auto& w : e.family.warnings) warnings.push_back(w);
        for (const auto& s : e.family.solutions) {
            std::vector<json> row{s.n, s.l, s.branch, s.bRoot, s.beta, s.epsilon, s.residuals.constraint, s.residuals.ode};
            if (cfg.verify) {
                const bool ok = s.residuals.oracleGap.has_value();
                if (!ok) ++unmatched;
                row.push_back(ok ? json(*s.residuals.oracleGap) : json(nullptr));
                row.push_back(ok ? *s.residuals.oracleIndex : -1);
                row.push_back(ok ? *s.residuals.nodeCount : -1);
            }
            table.rows.push_back(std::move(row));
        }
    }
    json diagnostics{{"discarded_complex_roots", discarded},
                     {"warnings", warnings},
                     {"note", "each row is a different potential: beta = b K^3 is fixed by the root"}};
    if (cfg.verify) diagnostics["unmatched"] = unmatched;
    emit(cfg, table, diagnostics, out);
    if (unmatched > 0) {
        diag << "verification failed: " << unmatched << " energies not found in the oracle spectrum\n";
        return kVerificationFailure;
    }
    return kSuccess;
}

inline int run_wavefunction(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    const auto family = solve_family(cfg.n.first, cfg.l.first, cfg.alpha, cfg.k, solve_options(cfg));
    if (family.solutions.empty()) throw SolverError("no real constraint roots for the requested (n, l)");
    if (static_cast<std::size_t>(cfg.branch) >= family.solutions.size())
        throw ConfigError("branch " + std::to_string(cfg.branch) + " out of range; " +
                          std::to_string(family.solutions.size()) + " solutions exist");
    const auto& sol = family.solutions[static_cast<std::size_t>(cfg.branch)];
    const auto sys = sol.system();
    const auto grid = grid_for(cfg, sys, sol.epsilon);
    const auto res = fd_eigensolve(sys, grid, levels_needed(sys, grid, sol.epsilon));
    const auto closest = match_energy(res, sol.epsilon, std::numeric_limits<double>::infinity());
    const auto& f = res.vectors[static_cast<std::size_t>(closest->index)];

    // interior nodes only: the walls pin f to zero, which says nothing about R there
    std::vector<double> radii;
    std::vector<RadialSample> oracle;
    for (int i = 1; i + 1 < grid.points; ++i) {
        const double r = grid.node(i);
        radii.push_back(r);
        oracle.push_back({r, f[static_cast<std::size_t>(i)] / r});
    }
    const auto poly = normalize(wavefunction(sol, radii));
    const auto ref = normalize(oracle);

    double overlap = 0.0;
    for (std::size_t i = 1; i < radii.size(); ++i) {
        auto g = [&](std::size_t j) { return poly[j].R * ref[j].R * radii[j] * radii[j]; };
        overlap += 0.5 * (radii[i] - radii[i - 1]) * (g(i) + g(i - 1));
    }

    Table table;
    table.columns = {"r", "R_polynomial", "R_oracle", "difference"};
    const std::size_t stride = std::max<std::size_t>(1, radii.size() / static_cast<std::size_t>(cfg.samples));
    for (std::size_t i = 0; i < radii.size(); i += stride)
        table.rows.push_back({radii[i], poly[i].R, ref[i].R, poly[i].R - ref[i].R});

    const bool matched = std::abs(closest->gap) <= cfg.tol * std::max(1.0, std::abs(sol.epsilon));
    const json diagnostics{{"n", sol.n},
                           {"l", sol.l},
                           {"branch", sol.branch},
                           {"b", sol.bRoot},
                           {"beta", sol.beta},
                           {"epsilon", sol.epsilon},
                           {"oracle_index", closest->index},
                           {"oracle_gap", closest->gap},
                           {"node_count", res.nodeCounts[static_cast<std::size_t>(closest->index)]},
                           {"overlap", overlap}};
    emit(cfg, table, diagnostics, out);
    if (!matched) {
        diag << "verification failed: oracle gap " << closest->gap << " exceeds tolerance\n";
        return kVerificationFailure;
    }
    return kSuccess;
}

inline int run_turning_points(const RunConfig& cfg, std::ostream& out) {
    const PhysicalSystem sys(cfg.alpha, cfg.beta, cfg.k, cfg.l.first);
    const auto tp = turning_points(sys, cfg.epsilon);
    Table table;
    table.columns = {"kind", "index", "real", "imag"};
    for (std::size_t i = 0; i < 4; ++i) table.rows.push_back({"root", static_cast<int>(i), tp.roots[i].real(), tp.roots[i].imag()});
    for (std::size_t i = 0; i < 4; ++i) table.rows.push_back({"vieta", static_cast<int>(i), tp.vietaResiduals[i], 0.0});
    const double outer = tp.outer();
    emit(cfg, table, json{{"real_count", tp.realCount}, {"outer_turning_point", jnum(outer)}}, out);
    return kSuccess;
}

/// Prints one line per criterion; with --format json or --out the table is written as a document
/// and the lines go to the diagnostic stream instead.
inline int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    const auto results = verify::run_all();
    const bool document = cfg.format == "json" || !cfg.out.empty();
    bool ok = true;
    Table table;
    table.columns = {"criterion", "passed", "seconds"};
    json details = json::array();
    for (const auto& r : results) {
        ok = ok && r.passed;
        table.rows.push_back({r.id, r.passed ? 1 : 0, r.seconds});
        details.push_back({{"criterion", r.id}, {"name", r.name}, {"detail", r.detail}});
        (document ? diag : out) << verify::format_line(r) << '\n';
    }
    if (document) emit(cfg, table, json{{"criteria", details}}, out);
    return ok ? kSuccess : kVerificationFailure;
}

}  // namespace detail

/// Executes a validated config. Exceptions from the solvers propagate to main().
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& diag) {
    cfg.validate();
    if (cfg.degreeCap > kDefaultDegreeCap)
        diag << "warning: degree cap " << cfg.degreeCap << " above " << kDefaultDegreeCap
             << "; constraint coefficients may lose accuracy\n";
    if (cfg.command == "spectrum") return detail::run_spectrum(cfg, out, diag);
    if (cfg.command == "wavefunction") return detail::run_wavefunction(cfg, out, diag);
    if (cfg.command == "turning-points") return detail::run_turning_points(cfg, out);
    return detail::run_verify(cfg, out, diag);
}

/// Full entry point with exit-code mapping: 0 ok, 2 config, 3 solver, 4 verification.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& diag = std::cerr) {
    try {
        const auto cfg = parse_args(argc, argv, out);
        return cfg ? run(*cfg, out, diag) : kSuccess;
    } catch (const ConfigError& e) {
        diag << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        diag << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        diag << "solver error: " << e.what() << '\n';
        return kSolverError;
    }
}

}  // namespace heunqes::cli
