#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "heunqes/cli.hpp"

using namespace heunqes::cli;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "heunqes");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = heunqes::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("heunqes_test_" + name);
}

}  // namespace

TEST_CASE("integer ranges") {
    CHECK(IntRange::parse("3").first == 3);
    CHECK(IntRange::parse("3").last == 3);
    CHECK(IntRange::parse("0..2").last == 2);
    CHECK(IntRange::parse("1..4").str() == "1..4");
    CHECK_THROWS_AS(IntRange::parse("x"), ConfigError);
    CHECK_THROWS_AS(IntRange::parse("1..x"), ConfigError);
    CHECK_THROWS_AS(IntRange::parse("1.5"), ConfigError);
}

TEST_CASE("spectrum n = 0 over l = 0..2") {
    const auto r = invoke({"spectrum", "--n", "0", "--l", "0..2", "--alpha", "1", "--k", "1"});
    REQUIRE(r.code == kSuccess);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"n", "l", "branch", "b", "beta", "epsilon", "constraint_residual", "ode_residual"});
    CHECK(rows[1][1] == "0");
    CHECK(std::stod(rows[1][5]) == 1.375);
    CHECK(rows[3][1] == "2");
}

TEST_CASE("spectrum n = 1 with alpha = 0 and oracle verification") {
    const auto r = invoke({"spectrum", "--n", "1", "--l", "0", "--alpha", "0", "--k", "1", "--verify"});
    REQUIRE(r.code == kSuccess);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].back() == "node_count");
    CHECK_THAT(std::stod(rows[1][3]), WithinRel(-std::sqrt(2.0), 1e-14));
    CHECK_THAT(std::stod(rows[2][3]), WithinRel(std::sqrt(2.0), 1e-14));
    for (std::size_t i = 1; i <= 2; ++i) {
        CHECK_THAT(std::stod(rows[i][5]), WithinRel(2.25, 1e-14));
        CHECK(std::abs(std::stod(rows[i][8])) < 1e-5 * 2.25);
    }
    // b < 0 puts the zero of H at positive r: first excited state of its potential; b > 0 is a ground state
    CHECK(rows[1][9] == "1");
    CHECK(rows[2][9] == "0");
}

TEST_CASE("turning points of the s-wave oscillator") {
    const auto r = invoke({"turning-points", "--alpha", "0", "--beta", "0", "--k", "1", "--l", "0", "--epsilon", "2"});
    REQUIRE(r.code == kSuccess);
    const auto rows = parse_csv(r.out);
    REQUIRE(rows.size() == 9);
    CHECK(rows[0] == std::vector<std::string>{"kind", "index", "real", "imag"});
    const double expected[4] = {-2.0, 0.0, 0.0, 2.0};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i + 1][0] == "root");
        CHECK_THAT(std::stod(rows[i + 1][2]), WithinAbs(expected[i], 1e-14));
        CHECK(rows[i + 5][0] == "vieta");
        CHECK(std::stod(rows[i + 5][2]) < 1e-12);
    }
}

TEST_CASE("wavefunction output compares with the oracle") {
    const auto r = invoke({"wavefunction", "--n", "0", "--l", "0", "--alpha", "1", "--k", "1", "--format", "json",
                           "--grid-points", "3000", "--samples", "50"});
    REQUIRE(r.code == kSuccess);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["diagnostics"]["overlap"].get<double>() > 0.99999);
    CHECK(doc["diagnostics"]["oracle_index"] == 0);
    const auto& rows = doc["results"];
    CHECK(rows.size() >= 50);
    double worst = 0.0;
    for (const auto& row : rows) worst = std::max(worst, std::abs(row["difference"].get<double>()));
    CHECK(worst < 1e-3);
}

TEST_CASE("identical configs give byte-identical CSV") {
    const std::vector<std::string> args{"spectrum", "--n", "0..3", "--l", "0..1", "--alpha", "0.7", "--k", "2"};
    const auto a = invoke(args), b = invoke(args);
    REQUIRE(a.code == kSuccess);
    CHECK(a.out == b.out);
    CHECK(a.out.find('\r') == std::string::npos);
    // deterministic (n, l, branch) order
    const auto rows = parse_csv(a.out);
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const auto key = [&](std::size_t j) { return std::tuple(std::stoi(rows[j][0]), std::stoi(rows[j][1]), std::stoi(rows[j][2])); };
        CHECK(key(i - 1) < key(i));
    }
}

TEST_CASE("JSON output re-read as config reproduces the run") {
    const auto path = temp_path("roundtrip.json");
    const auto first = invoke({"spectrum", "--n", "0..2", "--l", "1", "--alpha", "1.5", "--k", "0.5", "--format", "json",
                               "--grid-points", "2000", "--tol", "1e-4"});
    REQUIRE(first.code == kSuccess);
    std::ofstream(path) << first.out;
    const auto second = invoke({"--config", path.string()});
    REQUIRE(second.code == kSuccess);
    CHECK(second.out == first.out);
    std::filesystem::remove(path);
}

TEST_CASE("flags override config file values") {
    const auto path = temp_path("override.json");
    std::ofstream(path) << R"({"command": "spectrum", "n": 0, "l": "0..3", "alpha": 1, "k": 1})";
    const auto r = invoke({"--config", path.string(), "--l", "0", "--format", "json"});
    REQUIRE(r.code == kSuccess);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["config"]["l"] == "0");
    CHECK(doc["results"].size() == 1);
    std::filesystem::remove(path);
}

TEST_CASE("--out writes the file") {
    const auto path = temp_path("out.csv");
    const auto r = invoke({"spectrum", "--n", "0", "--l", "0", "--alpha", "1", "--k", "1", "--out", path.string()});
    REQUIRE(r.code == kSuccess);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("n,l,branch", 0) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("config errors exit with 2") {
    CHECK(invoke({}).code == kConfigError);
    CHECK(invoke({"bogus"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--k", "0"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--k", "-1"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--n", "3..1"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--l", "a"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--tol", "0"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--format", "xml"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--alpha", "-1"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--unknown-flag"}).code == kConfigError);
    CHECK(invoke({"spectrum", "--n", "40"}).code == kConfigError);
    CHECK(invoke({"wavefunction", "--n", "0..1"}).code == kConfigError);
    CHECK(invoke({"wavefunction", "--n", "0", "--branch", "3"}).code == kConfigError);
    CHECK(invoke({"--config", "/nonexistent/heunqes.json"}).code == kConfigError);
    const auto r = invoke({"spectrum", "--grid-points", "4"});
    CHECK(r.code == kConfigError);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("raising the degree cap warns") {
    const auto r = invoke({"spectrum", "--n", "0", "--degree-cap", "40"});
    CHECK(r.code == kSuccess);
    CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("solver failure exits with 3") {
    // the harmonic term overflows on such a box, so the oracle cannot build its operator
    const auto r = invoke({"wavefunction", "--n", "0", "--l", "0", "--alpha", "1", "--r-min", "1e-8", "--r-max", "1e300"});
    CHECK(r.code == kSolverError);
}

TEST_CASE("unmatched energies exit with 4") {
    // a box that cuts into the wavefunction shifts every level well beyond the tolerance
    const auto r = invoke({"spectrum", "--n", "0", "--l", "0", "--alpha", "1", "--verify", "--r-max", "1.0", "--tol", "1e-6"});
    CHECK(r.code == kVerificationFailure);
    CHECK(r.out.find("nan") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
    const auto r = invoke({"--help"});
    CHECK(r.code == kSuccess);
    CHECK(r.out.find("--alpha") != std::string::npos);
}

TEST_CASE("the installed binary reports exit codes to the shell") {
    const std::string exe = HEUNQES_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(status("spectrum --n 0 --l 0 --alpha 1") == 0);
    CHECK(status("spectrum --k 0") == 2);
}
