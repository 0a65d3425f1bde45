#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/report.hpp"
#include "lyacert/scenario.hpp"

namespace lyacert {

struct RunOverrides {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> dense_dt;
    std::optional<std::size_t> threads;  // unset: LYACERT_THREADS, else 1
};

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitInvalid = 2, kExitRuntime = 3 };

struct RunOutcome {
    int exit_code = kExitRuntime;
    std::optional<RunReport> report;
    std::vector<std::string> messages;
    std::string output_dir;
};

/// Value of LYACERT_THREADS, or 1 when unset or malformed.
std::size_t threads_from_env();

/// Applies CLI overrides; throws InvalidInput when the result is inconsistent.
void apply_overrides(Scenario& s, const RunOverrides& o);

/// Simulate, certify, rate and classify every initial condition. Results are
/// ordered by x0 index whatever the thread count. Throws Error subclasses;
/// messages name the x0 index or the scenario field at fault.
RunReport run_pipeline(const Scenario& s, std::size_t threads = 1);

/// Writes report.json plus per-trajectory CSV files into `dir`.
void write_outputs(const RunReport& report, const std::string& dir);

/// Parse, validate, run and write. Never throws.
RunOutcome run_scenario(const std::string& path, const RunOverrides& overrides = {});

}  // namespace lyacert
