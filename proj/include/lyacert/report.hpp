#pragma once

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/case_studies.hpp"
#include "lyacert/certificates.hpp"
#include "lyacert/convergence.hpp"
#include "lyacert/dynamics.hpp"

namespace lyacert {

inline constexpr const char* kToolVersion = "0.1.0";

/// Sign check of a perturbed energy W_eps along one trajectory.
struct PerturbedReport {
    std::string family;  // "din" or "pd"
    double epsilon = 0.0;
    double exclusion_radius = 1e-6;
    std::size_t points_checked = 0;
    std::size_t nonnegative_points = 0;      // W_eps' >= 0 outside the exclusion ball
    double max_W_eps_dot = -std::numeric_limits<double>::infinity();
    std::optional<double> worst_bound_gap;  // max(W_eps' - decay bound), din only
    std::optional<double> c_eps;
    std::optional<PrimalDualConstants> constants;
    std::optional<PerturbedOutcome> outcome;
    std::optional<double> max_admissible_epsilon;
    std::string note;
    bool pass = false;
};

std::string to_string(PerturbedOutcome o);

struct TrajectoryResult {
    std::size_t index = 0;
    State x0;
    Trajectory trajectory;
    std::optional<DecayReport> decay;
    std::optional<IntegralReport> integral;
    std::optional<VanishingReport> vanishing;
    std::optional<TimeSeries> dist;
    std::optional<ConvergenceCheck> convergence;
    std::optional<L2Report> l2;
    std::optional<RateReport> rates;
    std::optional<ExponentialReport> exponential;
    std::optional<PerturbedReport> perturbed;
    std::map<std::string, bool> checks;  // enabled check -> pass

    bool pass() const;
};

struct RunReport {
    std::string scenario_name;
    nlohmann::json scenario_echo;
    std::vector<TrajectoryResult> trajectories;
    std::optional<StabilityVerdict> stability;
    bool overall_pass = false;
    std::string tool_version = kToolVersion;
    double wall_time = 0.0;
};

/// Non-finite numbers become the strings "inf", "-inf" and "nan" so that
/// reports round-trip through a JSON parser unchanged.
nlohmann::json number(double x);

nlohmann::json to_json(const DecayReport& r);
nlohmann::json to_json(const IntegralReport& r);
nlohmann::json to_json(const VanishingReport& r);
nlohmann::json to_json(const ConvergenceCheck& r);
nlohmann::json to_json(const L2Report& r);
nlohmann::json to_json(const RateReport& r);
nlohmann::json to_json(const ExponentialReport& r);
nlohmann::json to_json(const PerturbedReport& r);
nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const TrajectoryResult& r);
nlohmann::json to_json(const RunReport& r);

/// YAML scalars become numbers or booleans where they parse as such.
nlohmann::json yaml_to_json(const YAML::Node& node);

/// 17 significant digits.
std::string format_float(double x);

std::string trajectory_csv(const Trajectory& traj);
/// t, W, Wdot, N1, N2, residual, dist (dist empty when no critical set).
std::string decay_csv(const DecayReport& decay, const std::optional<TimeSeries>& dist);
/// T, min_dist, bound, pass.
std::string windows_csv(const RateReport& rates);

}  // namespace lyacert
