#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lyacert/report.hpp"
#include "lyacert/runner.hpp"
#include "lyacert/scenario.hpp"

using namespace lyacert;
namespace fs = std::filesystem;

namespace {

std::string source(const std::string& rel) { return std::string(LYACERT_SOURCE_DIR) + "/" + rel; }

std::string scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lyacert_test_" + name);
    fs::remove_all(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json report_without_clock(const std::string& dir) {
    nlohmann::json j = nlohmann::json::parse(slurp(dir + "/report.json"));
    j.erase("wall_time");
    return j;
}

std::string joined(const std::vector<Diagnostic>& ds) {
    std::string out;
    for (const auto& d : ds) out += format(d) + "\n";
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LYACERT_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("bundled scenarios validate cleanly") {
    for (const char* name : {"din_quad", "least_squares_semistable", "rosenbrock", "pd_quad", "synthetic_coupled",
                             "unstable_scalar", "inline_linear"}) {
        const auto ds = validate_scenario(source("scenarios/") + name + ".yaml");
        CHECK_MESSAGE(ds.empty(), name << ": " << joined(ds));
    }
}

TEST_CASE("invalid scenarios name the offending field") {
    const auto contains = [](const std::string& file, const std::string& field, const std::string& text) {
        const auto ds = validate_scenario(source("tests/data/") + file);
        REQUIRE_FALSE(ds.empty());
        const std::string all = joined(ds);
        CHECK_MESSAGE(all.find(field + ":") != std::string::npos, all);
        CHECK_MESSAGE(all.find(text) != std::string::npos, all);
    };
    contains("bad_delta.yaml", "delta_policy", "(0, 0.5)");
    contains("bad_epsilon.yaml", "system_params.epsilon", "min{2α/3, 2/β}");
    contains("missing_growth.yaml", "quadratic_growth", "missing block");
    contains("no_x0.yaml", "x0", "at least one initial condition");
}

TEST_CASE("inline validation") {
    CHECK_FALSE(parse_scenario_text("name: [unclosed").ok());
    const auto unknown = parse_scenario_text("name: a\nsystem: linear:stable_scalar\nx0: [[1]]\nbogus: 1\n");
    CHECK_FALSE(unknown.ok());
    CHECK(joined(unknown.diagnostics).find("bogus") != std::string::npos);
    const auto wrong_dim = parse_scenario_text("name: a\nsystem: linear:stable_scalar\nx0: [[1, 2]]\n");
    CHECK_FALSE(wrong_dim.ok());
    CHECK(joined(wrong_dim.diagnostics).find("x0") != std::string::npos);
    CHECK(parse_scenario_text("name: a\nsystem: linear:stable_scalar\nx0: [[1]]\nchecks: [decay]\n").ok());
    CHECK_FALSE(parse_scenario_text("name: a\nsystem: linear:stable_scalar\nx0: [[1]]\nchecks: [nope]\n").ok());
}

TEST_CASE("run_scenario exit codes") {
    RunOverrides o;
    o.output_dir = scratch("exit_pass");
    CHECK(run_scenario(source("scenarios/synthetic_coupled.yaml"), o).exit_code == kExitPass);
    o.output_dir = scratch("exit_unstable");
    const RunOutcome unstable = run_scenario(source("scenarios/unstable_scalar.yaml"), o);
    CHECK(unstable.exit_code == kExitCheckFailed);
    REQUIRE(unstable.report.has_value());
    CHECK_FALSE(unstable.report->overall_pass);
    o.output_dir = scratch("exit_invalid");
    CHECK(run_scenario(source("tests/data/bad_delta.yaml"), o).exit_code == kExitInvalid);
    CHECK(run_scenario(source("tests/data/no_x0.yaml"), o).exit_code == kExitInvalid);
    const RunOutcome missing = run_scenario("/nonexistent/scenario.yaml", o);
    CHECK(missing.exit_code == kExitInvalid);
    CHECK_FALSE(missing.messages.empty());
}

TEST_CASE("reports are reproducible across runs and thread counts") {
    const std::string dir_a = scratch("repro_a"), dir_b = scratch("repro_b"), dir_c = scratch("repro_c");
    RunOverrides o;
    o.threads = 1;
    o.output_dir = dir_a;
    REQUIRE(run_scenario(source("scenarios/least_squares_semistable.yaml"), o).exit_code == kExitPass);
    o.output_dir = dir_b;
    REQUIRE(run_scenario(source("scenarios/least_squares_semistable.yaml"), o).exit_code == kExitPass);
    o.threads = 3;
    o.output_dir = dir_c;
    REQUIRE(run_scenario(source("scenarios/least_squares_semistable.yaml"), o).exit_code == kExitPass);

    const nlohmann::json a = report_without_clock(dir_a);
    CHECK(a.dump() == report_without_clock(dir_b).dump());
    CHECK(a.dump() == report_without_clock(dir_c).dump());
    for (const char* f : {"trajectory_0.csv", "decay_3.csv"}) {
        CHECK(slurp(dir_a + "/" + f) == slurp(dir_b + "/" + f));
        CHECK(slurp(dir_a + "/" + f) == slurp(dir_c + "/" + f));
    }
    CHECK(a.at("stability").at("verdict") == "SS");
    CHECK(a.at("trajectories").size() == 4);
    CHECK(a.at("trajectories")[0].at("index") == 0);
    CHECK(a.at("trajectories")[3].at("index") == 3);
}

TEST_CASE("seed override changes only the echoed seed for a deterministic pipeline") {
    const std::string dir = scratch("seed");
    RunOverrides o;
    o.output_dir = dir;
    o.seed = 42;
    REQUIRE(run_scenario(source("scenarios/synthetic_coupled.yaml"), o).exit_code == kExitPass);
    const nlohmann::json j = report_without_clock(dir);
    CHECK(j.at("scenario").at("effective").at("seed") == 42);
}

TEST_CASE("report.json round-trips through a JSON parser") {
    const std::string dir = scratch("roundtrip");
    RunOverrides o;
    o.output_dir = dir;
    REQUIRE(run_scenario(source("scenarios/unstable_scalar.yaml"), o).exit_code == kExitCheckFailed);
    const std::string text = slurp(dir + "/report.json");
    const nlohmann::json once = nlohmann::json::parse(text);
    CHECK(once.dump(2) + "\n" == text);
    CHECK(nlohmann::json::parse(once.dump()).dump() == once.dump());
    CHECK(once.at("tool_version") == kToolVersion);
    CHECK(once.at("overall_pass") == false);
}

TEST_CASE("non-finite numbers serialise as strings") {
    CHECK(number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(number(std::nan("")) == "nan");
    CHECK(number(0.5) == 0.5);
}

TEST_CASE("CSV formatting") {
    CHECK(format_float(0.1) == "0.10000000000000001");
    CHECK(format_float(1.0) == "1");
    CHECK(std::stod(format_float(M_PI)) == M_PI);

    Trajectory tr;
    tr.times = {0.0, 0.5};
    tr.states = {(State(2) << 1.0, 2.0).finished(), (State(2) << 0.1, -3.0).finished()};
    CHECK(trajectory_csv(tr) == "t,x0,x1\n0,1,2\n0.5,0.10000000000000001,-3\n");

    const std::string dir = scratch("csv");
    RunOverrides o;
    o.output_dir = dir;
    REQUIRE(run_scenario(source("scenarios/din_quad.yaml"), o).exit_code == kExitPass);
    const auto first_line = [](const std::string& text) { return text.substr(0, text.find('\n')); };
    CHECK(first_line(slurp(dir + "/decay_0.csv")) == "t,W,Wdot,N1,N2,residual,dist");
    CHECK(first_line(slurp(dir + "/windows_0.csv")) == "T,min_dist,bound,pass");
    CHECK(first_line(slurp(dir + "/trajectory_2.csv")) == "t,x0,x1,x2,x3");
}

TEST_CASE("command-line binary") {
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("list-builtins") == 0);
    CHECK(run_cli("validate " + source("scenarios/din_quad.yaml")) == 0);
    CHECK(run_cli("validate " + source("tests/data/bad_epsilon.yaml")) == 2);
    CHECK(run_cli("validate /nonexistent.yaml") == 2);
    CHECK(run_cli("run " + source("tests/data/no_x0.yaml")) == 2);
    CHECK(run_cli("run " + source("scenarios/unstable_scalar.yaml") + " --output-dir " + scratch("cli_fail")) == 1);
    const std::string dir = scratch("cli_pass");
    CHECK(run_cli("run " + source("scenarios/inline_linear.yaml") + " --output-dir " + dir + " --seed 7 --dense-dt 0.01") == 0);
    CHECK(fs::exists(dir + "/report.json"));
    CHECK(report_without_clock(dir).at("scenario").at("effective").at("dense_output_dt") == 0.01);
    CHECK(run_cli("frobnicate") != 0);
}
