#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/certificates.hpp"
#include "lyacert/dynamics.hpp"

namespace lyacert {

enum class CriticalSetKind { point, affine_subspace, product, custom };

/// The critical set E, described by a distance evaluator and (optionally) a
/// sampler producing points of E for stability probing.
class CriticalSetSpec {
public:
    using Sampler = std::function<State(std::size_t)>;

    static CriticalSetSpec point(State p);
    /// basepoint + span(directions); directions need not be orthonormal.
    static CriticalSetSpec affine(State basepoint, std::vector<State> directions);
    /// Cartesian product of sets on consecutive coordinate blocks.
    static CriticalSetSpec product(std::vector<CriticalSetSpec> factors);
    static CriticalSetSpec custom(int dimension, std::function<double(const State&)> distance,
                                  std::optional<Sampler> sampler = std::nullopt);

    CriticalSetKind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    double distance(const State& x) const;
    bool has_sampler() const { return static_cast<bool>(sampler_); }
    State sample(std::size_t index) const;
    /// Number of distinct samples the sampler can produce (1 for a point).
    std::optional<std::size_t> sample_count() const { return sample_count_; }
    /// Nearest point of E; available for point, affine and product-of-those sets.
    bool has_projector() const { return static_cast<bool>(projector_); }
    State project(const State& x) const;

private:
    CriticalSetKind kind_ = CriticalSetKind::custom;
    int dimension_ = 0;
    std::function<double(const State&)> distance_;
    Sampler sampler_;
    std::function<State(const State&)> projector_;
    std::optional<std::size_t> sample_count_;
};

struct ErrorBoundParams {
    double c = 1.0;
    double neighborhood_radius = std::numeric_limits<double>::infinity();
    std::optional<double> c1;
    std::optional<double> c2;

    void validate() const;
};

struct QuadraticGrowthParams {
    double m = 1.0;
    double r = 1.0;
    double W_infinity = 0.0;

    void validate() const;
};

TimeSeries distance_series(const Trajectory& traj, const CriticalSetSpec& E);

struct ConvergenceCheck {
    bool pass = false;
    double terminal_mean = 0.0;
    double terminal_max = 0.0;
    double threshold = 0.0;
};

ConvergenceCheck check_convergence_to_E(const TimeSeries& dist, double threshold);

/// Mean of W over the final 5% of the horizon.
double estimate_W_infinity(const TimeSeries& W_series);

/// K = sqrt((W(0) - W_inf) / (gamma c)).
double rate_constant_K(const TimeSeries& W_series, double gamma, double c);

struct L2Report {
    double integral_dist_sq = 0.0;
    double budget = 0.0;
    double W_infinity = 0.0;
    bool bound_pass = false;
    // min over samples in the neighborhood of (N1 + N2) / (c dist^2)
    double worst_ratio = std::numeric_limits<double>::infinity();
    bool error_bound_pass = true;
    std::optional<double> worst_ratio_N1;  // N1 / (c1 dist^2), when c1 is given
    std::optional<double> worst_ratio_N2;
    std::size_t samples_in_neighborhood = 0;

    bool pass() const { return bound_pass && error_bound_pass; }
};

/// L2 bound on dist(x(t), E) plus an empirical check of N1 + N2 >= c dist^2.
L2Report l2_distance_bound(const TimeSeries& dist, const DecayReport& decay, const ErrorBoundParams& eb);

struct WindowCheck {
    double T = 0.0;
    double min_dist = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct RateReport {
    double K = 0.0;
    std::vector<WindowCheck> window_checks;
    std::vector<std::string> notes;
    // log dist = log C - p log t on the tail; unset when the tail sits at the noise floor.
    std::optional<double> C_fit;
    std::optional<double> exponent_fit;
    std::size_t fit_samples = 0;
    bool monotone_tail = false;
    bool envelope_holds = false;
    bool pointwise_pass = false;
    double tail_start_time = 0.0;
    // Entry time into the error-bound neighborhood and monotonicity onset.
    std::optional<double> t_entry;
    std::optional<double> t_monotone;

    bool windows_pass() const;
};

std::vector<double> default_window_grid(double horizon);

/// min of dist over [T, 2T] against K / sqrt(T) for each T.
RateReport subsequence_rate(const TimeSeries& dist, double K, std::vector<double> T_grid = {});

/// Power-law fit and monotonicity on the tail [tail_fraction_start * H, H].
RateReport pointwise_rate(const TimeSeries& dist, double tail_fraction_start = 0.25);

/// Both parts plus entry/onset estimates, merged into one report.
RateReport rate_report(const TimeSeries& dist, double K, const ErrorBoundParams& eb, std::vector<double> T_grid = {},
                       double tail_fraction_start = 0.25);

struct ExponentialReport {
    bool applicable = false;
    double t0 = 0.0;
    double W_t0 = 0.0;
    double rate = 0.0;  // gamma c / (2 m)
    bool envelope_pass = false;
    double worst_envelope_ratio = 0.0;  // max dist / envelope over t >= t0
    std::size_t samples_compared = 0;   // samples where dist or the envelope is above the floor
    bool growth_pass = false;
    double worst_growth_margin = 0.0;  // min (W - W_inf - m dist^2)
    std::optional<double> fitted_W_decay_rate;
    std::string note;

    bool pass() const { return applicable && envelope_pass && growth_pass; }
};

/// Samples where both dist and the envelope sit below `resolution_floor`
/// (integrator noise) are not compared.
ExponentialReport exponential_rate(const TimeSeries& dist, const TimeSeries& W_series, const QuadraticGrowthParams& qg,
                                   double gamma, double c, double resolution_floor = 1e-10);

struct ProbeConfig {
    std::size_t equilibria = 8;
    std::vector<double> radii{1e-2, 1e-3};
    std::size_t directions_per_radius = 4;
    double excursion_factor = 10.0;
    double convergence_threshold = 1e-5;
    std::uint64_t seed = 0xC0FFEE;
    std::size_t threads = 1;

    void validate() const;
};

struct StabilityRow {
    std::size_t equilibrium_index = 0;
    State equilibrium;
    double r_probe = 0.0;
    std::size_t direction_index = 0;
    double max_excursion = 0.0;
    double ratio = 0.0;  // max_excursion / r_probe
    bool stable = false;
};

struct ConvergenceRow {
    std::size_t equilibrium_index = 0;
    double r_probe = 0.0;
    std::size_t direction_index = 0;
    double terminal_dist = 0.0;
    double limit_drift = 0.0;
    bool truncated = false;
    bool converged = false;
};

enum class Verdict { AS, SS, PAS, inconclusive };
std::string to_string(Verdict v);

struct StabilityVerdict {
    Verdict verdict = Verdict::inconclusive;
    std::vector<StabilityRow> lyapunov_stability_table;
    std::vector<ConvergenceRow> convergence_table;
    bool stability_probe_pass = false;
    bool convergence_probe_pass = false;
    std::uint64_t seed = 0;
    bool empirical = true;
};

StabilityVerdict classify_stability(const SystemSpec& system, const CriticalSetSpec& E, const ProbeConfig& probe,
                                    const IntegratorConfig& integ, bool E_is_equilibrium_set);

/// Diameter of the states over the final 5% of the horizon.
double limit_drift(const Trajectory& traj);

}  // namespace lyacert
