#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lyacert/case_studies.hpp"
#include "lyacert/certificates.hpp"
#include "lyacert/convergence.hpp"
#include "lyacert/dynamics.hpp"

namespace lyacert {

enum class Check { decay, integral, vanishing, distance, l2, subsequence, pointwise, exponential, classify, perturbed };

std::string to_string(Check c);
std::optional<Check> parse_check(const std::string& name);
const std::vector<Check>& all_checks();

enum class SlopeMode { global, local, declared };

struct Diagnostic {
    std::string field;
    std::string message;
};

std::string format(const Diagnostic& d);

/// Everything needed to simulate and certify one system.
struct SystemBundle {
    std::string id;
    SystemSpec system;
    LyapunovPair pair;
    std::optional<CriticalSetSpec> critical_set;
    bool critical_set_is_equilibrium_set = false;
    // Closed-form slope bound for built-in pairs.
    std::optional<double> known_slope;
    std::optional<ObjectiveSpec> objective;
    std::optional<DINParams> din;
    std::optional<PrimalDualParams> pd;
};

struct Scenario {
    std::string name;
    std::string system_id;  // built-in id, or "inline"
    YAML::Node source;      // parsed document, echoed into reports
    std::vector<State> x0;
    IntegratorConfig integrator;
    std::optional<double> explicit_delta;  // unset: optimal delta
    SlopeMode slope_mode = SlopeMode::global;
    std::optional<double> declared_slope;
    std::set<Check> checks;
    double vanishing_threshold = 1e-8;
    double distance_threshold = 1e-5;
    std::optional<double> decay_tol;
    std::optional<ErrorBoundParams> error_bound;
    std::optional<QuadraticGrowthParams> quadratic_growth;
    ProbeConfig probe;
    std::vector<double> window_grid;
    double tail_start = 0.25;
    std::string output_dir = "lyacert_out";
    std::uint64_t seed = 0xC0FFEE;

    SystemBundle bundle;
};

struct ScenarioParse {
    std::optional<Scenario> scenario;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return scenario.has_value() && diagnostics.empty(); }
};

/// Parses and cross-validates a scenario document without integrating anything.
ScenarioParse parse_scenario(const YAML::Node& doc);
ScenarioParse parse_scenario_text(const std::string& text);
/// Throws IoError when the file cannot be read.
ScenarioParse parse_scenario_file(const std::string& path);

/// Empty list means the scenario is valid.
std::vector<Diagnostic> validate_scenario(const std::string& path);

/// Built-in system bundles addressable by id ("din:quad_iso", "pd:quad_iso_eqcon", ...).
std::vector<std::string> builtin_system_ids();
SystemBundle builtin_bundle(const std::string& id, const DINParams& din = {});

/// Slope bound implied by the scenario's pair and slope mode (global or declared only).
SlopeBound scenario_slope_bound(const Scenario& s);

}  // namespace lyacert
