#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/dynamics.hpp"

namespace lyacert {

using InteractionFn = std::function<double(double)>;

/// Hypothesis bundle: V1' <= -N1 and V2' <= -N2 + h(N1).
///
/// Single-function mode (V2, N2, h all zero) is the usual way to feed a plain
/// Lyapunov function with one aggregated dissipation term.
struct LyapunovPair {
    ScalarField V1;
    ScalarField V2;
    ScalarField N1;
    ScalarField N2;
    InteractionFn h;
    // Analytic time derivatives along the flow, when known.
    std::optional<ScalarField> V1_dot;
    std::optional<ScalarField> V2_dot;
    // Extra nonnegative observables reported alongside N1, N2 (e.g. the two
    // terms folded into N1 in single-function mode).
    std::map<std::string, ScalarField> raw_observables;
    bool single_function = false;

    /// Checks h(0) = 0 within 1e-12.
    void validate() const;

    static LyapunovPair single(ScalarField V, ScalarField N, std::optional<ScalarField> V_dot = std::nullopt);
    static LyapunovPair composite(ScalarField V1, ScalarField N1, ScalarField V2, ScalarField N2,
                                  InteractionFn h);
};

enum class SlopeKind { global_L, local_B_omega, bounded_range_L_R };

struct SlopeBound {
    SlopeKind kind = SlopeKind::global_L;
    double value = 0.0;  // +inf marks a divergent ratio
    std::optional<double> range_R;
    std::vector<double> sample_grid;

    bool finite() const { return value < std::numeric_limits<double>::infinity(); }
};

/// Log-uniform grid on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// sup_{r > 0} h(r)/r sampled on `grid` (default 400 points on [1e-8, 1e4]).
SlopeBound slope_bound_global(const InteractionFn& h, std::vector<double> grid = {});

/// sup_{0 < s <= R} h(s)/s sampled log-uniformly on [1e-8 R, R].
SlopeBound slope_bound_local(const InteractionFn& h, double R, std::size_t points = 400);

/// Same, with R = max N1 along the trajectory (the tube the trajectory lives in).
SlopeBound slope_bound_local(const InteractionFn& h, const Trajectory& traj, const LyapunovPair& pair,
                             std::size_t points = 400);

/// A caller-declared analytic bound, spot-checked on `grid`.
SlopeBound declare_slope_bound(const InteractionFn& h, double value, std::vector<double> grid = {});

struct CompositeCertificate {
    double delta = 1.0;
    double gamma = 1.0;
    SlopeBound slope;
};

/// delta* = gamma* = 1/(1+L).
CompositeCertificate optimal_delta(const SlopeBound& slope);

/// gamma = min(1 - delta L, delta) for delta in (0, 1/L).
CompositeCertificate make_certificate(const SlopeBound& slope, double delta);

/// Admissible delta range as text, e.g. "(0, 0.5)".
std::string admissible_delta_range(const SlopeBound& slope);

struct DecayReport {
    CompositeCertificate certificate;
    TimeSeries W_series;
    TimeSeries Wdot_series;
    TimeSeries N1_series;
    TimeSeries N2_series;
    TimeSeries residual_series;
    std::map<std::string, TimeSeries> raw_series;
    double max_violation = 0.0;
    std::vector<double> violation_times;
    double tol = 0.0;
    bool analytic_wdot = false;
    // Analytic vs numerical Wdot, only when an analytic derivative was used.
    std::optional<double> wdot_crosscheck_discrepancy;
    double wdot_crosscheck_tol = 0.0;
    bool truncated = false;

    bool crosscheck_pass() const {
        return !wdot_crosscheck_discrepancy || *wdot_crosscheck_discrepancy <= wdot_crosscheck_tol;
    }
    bool passed() const { return violation_times.empty() && crosscheck_pass(); }
};

/// Checks W' + gamma (N1 + N2) <= tol on every grid point of `traj`.
/// The default tolerance is 1e-6 (1 + max|W|).
DecayReport verify_strict_decay(const Trajectory& traj, const LyapunovPair& pair, const CompositeCertificate& cert,
                                std::optional<double> tol = std::nullopt);

/// Max |a - b| and the tolerance 5e-3 (1 + max|a|) used for derivative cross-checks.
struct DerivativeCrossCheck {
    double discrepancy = 0.0;
    double tolerance = 0.0;
    bool pass() const { return discrepancy <= tolerance; }
};
DerivativeCrossCheck crosscheck_derivative(const TimeSeries& analytic, const TimeSeries& numeric);

struct IntegralReport {
    double dissipation_integral = 0.0;
    double budget = 0.0;
    bool satisfied = false;
    double W_limit_estimate = 0.0;
};

IntegralReport integral_estimate(const DecayReport& report);

struct VanishingReport {
    double terminal_N1 = 0.0;
    double terminal_N2 = 0.0;
    std::map<std::string, double> terminal_raw;
    double uc_surrogate_bound = 0.0;
    double threshold = 0.0;
    bool truncated = false;
    bool vanished = false;
};

VanishingReport observable_vanishing(const DecayReport& report, double threshold);

}  // namespace lyacert
