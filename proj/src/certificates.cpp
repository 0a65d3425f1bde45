#include "lyacert/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lyacert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScalarField zero_field() {
    return [](const State&) { return 0.0; };
}

double max_abs(const TimeSeries& s) {
    double m = 0.0;
    for (double v : s.values()) m = std::max(m, std::abs(v));
    return m;
}

enum class DivergenceEnds { both, low_only };

// Max of h(r)/r over `grid`, or +inf when the ratio is still climbing by more
// than 1% across an outer decade of the grid.
double sampled_sup(const InteractionFn& h, const std::vector<double>& grid, DivergenceEnds ends) {
    if (grid.empty()) throw InvalidInput("slope bound grid is empty");
    const double r_min = grid.front(), r_max = grid.back();
    double low = 0.0, high = 0.0, inner = 0.0, all = 0.0;
    bool have_inner = false;
    for (double r : grid) {
        const double hr = h(r);
        if (!std::isfinite(hr)) {
            std::ostringstream os;
            os << "h(" << r << ") is not finite";
            throw EvaluationError(os.str());
        }
        if (hr < 0.0) {
            std::ostringstream os;
            os << "h(" << r << ") = " << hr << " < 0 violates h >= 0";
            throw HypothesisViolation(os.str());
        }
        const double ratio = hr / r;
        all = std::max(all, ratio);
        if (r <= 10.0 * r_min) {
            low = std::max(low, ratio);
        } else if (r >= r_max / 10.0) {
            high = std::max(high, ratio);
        } else {
            inner = std::max(inner, ratio);
            have_inner = true;
        }
    }
    if (have_inner) {
        if (low > 0.0 && low > 1.01 * inner) return kInf;
        if (ends == DivergenceEnds::both && high > 0.0 && high > 1.01 * inner) return kInf;
    }
    return all;
}

std::vector<double> checked_sorted(std::vector<double> grid) {
    if (grid.empty()) throw InvalidInput("slope bound grid is empty");
    for (double r : grid)
        if (!(r > 0.0)) throw InvalidInput("slope bound grid entries must be > 0");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

}  // namespace

void LyapunovPair::validate() const {
    if (!V1 || !V2 || !N1 || !N2 || !h) throw InvalidInput("Lyapunov pair has an unset evaluator");
    const double h0 = h(0.0);
    if (!(std::abs(h0) <= 1e-12)) {
        std::ostringstream os;
        os << "h(0) = " << h0 << " but the interaction function must vanish at 0";
        throw HypothesisViolation(os.str());
    }
}

LyapunovPair LyapunovPair::single(ScalarField V, ScalarField N, std::optional<ScalarField> V_dot) {
    LyapunovPair p;
    p.V1 = std::move(V);
    p.N1 = std::move(N);
    p.V2 = zero_field();
    p.N2 = zero_field();
    p.h = [](double) { return 0.0; };
    p.V1_dot = std::move(V_dot);
    p.V2_dot = zero_field();
    p.single_function = true;
    p.validate();
    return p;
}

LyapunovPair LyapunovPair::composite(ScalarField V1, ScalarField N1, ScalarField V2, ScalarField N2,
                                     InteractionFn h) {
    LyapunovPair p;
    p.V1 = std::move(V1);
    p.N1 = std::move(N1);
    p.V2 = std::move(V2);
    p.N2 = std::move(N2);
    p.h = std::move(h);
    p.validate();
    return p;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi >= lo) || points == 0) throw InvalidInput("log_grid needs 0 < lo <= hi and points > 0");
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = hi;
        return grid;
    }
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(points - 1));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

SlopeBound slope_bound_global(const InteractionFn& h, std::vector<double> grid) {
    if (grid.empty()) grid = log_grid(1e-8, 1e4, 400);
    grid = checked_sorted(std::move(grid));
    SlopeBound s;
    s.kind = SlopeKind::global_L;
    s.value = sampled_sup(h, grid, DivergenceEnds::both);
    s.sample_grid = std::move(grid);
    return s;
}

SlopeBound slope_bound_local(const InteractionFn& h, double R, std::size_t points) {
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidInput("slope_bound_local needs a finite R > 0");
    SlopeBound s;
    s.kind = SlopeKind::bounded_range_L_R;
    s.range_R = R;
    s.sample_grid = log_grid(1e-8 * R, R, points);
    s.value = sampled_sup(h, s.sample_grid, DivergenceEnds::low_only);
    return s;
}

SlopeBound slope_bound_local(const InteractionFn& h, const Trajectory& traj, const LyapunovPair& pair,
                             std::size_t points) {
    const TimeSeries n1 = evaluate_along(traj, pair.N1);
    const double R = *std::max_element(n1.values().begin(), n1.values().end());
    SlopeBound s;
    if (R > 0.0) s = slope_bound_local(h, R, points);
    s.kind = SlopeKind::local_B_omega;
    s.range_R = R;
    return s;
}

SlopeBound declare_slope_bound(const InteractionFn& h, double value, std::vector<double> grid) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw InvalidInput("declared slope bound must be finite and >= 0");
    if (grid.empty()) grid = log_grid(1e-8, 1e4, 400);
    grid = checked_sorted(std::move(grid));
    for (double r : grid) {
        const double ratio = h(r) / r;
        if (ratio > value + 1e-12) {
            std::ostringstream os;
            os << "declared slope bound " << value << " is below h(r)/r = " << ratio << " at r = " << r;
            throw HypothesisViolation(os.str());
        }
    }
    SlopeBound s;
    s.kind = SlopeKind::global_L;
    s.value = value;
    s.sample_grid = std::move(grid);
    return s;
}

CompositeCertificate optimal_delta(const SlopeBound& slope) {
    if (!slope.finite())
        throw NoCertificate(
            "slope bound is unbounded; no global certificate exists, use the local bound over the trajectory range");
    const double d = 1.0 / (1.0 + slope.value);
    return {d, d, slope};
}

std::string admissible_delta_range(const SlopeBound& slope) {
    std::ostringstream os;
    os << "(0, ";
    if (slope.value == 0.0)
        os << "inf";
    else
        os << 1.0 / slope.value;
    os << ")";
    return os.str();
}

CompositeCertificate make_certificate(const SlopeBound& slope, double delta) {
    if (!slope.finite()) throw NoCertificate("slope bound is unbounded; no delta is admissible");
    const bool ok = delta > 0.0 && std::isfinite(delta) && (slope.value == 0.0 || delta * slope.value < 1.0);
    if (!ok) {
        std::ostringstream os;
        os << "delta = " << delta << " outside admissible range " << admissible_delta_range(slope);
        throw InvalidInput(os.str());
    }
    return {delta, std::min(1.0 - delta * slope.value, delta), slope};
}

DerivativeCrossCheck crosscheck_derivative(const TimeSeries& analytic, const TimeSeries& numeric) {
    if (analytic.times() != numeric.times()) throw InvalidInput("cross-check series are not on a shared grid");
    DerivativeCrossCheck c;
    for (std::size_t k = 0; k < analytic.size(); ++k)
        c.discrepancy = std::max(c.discrepancy, std::abs(analytic[k] - numeric[k]));
    c.tolerance = 5e-3 * (1.0 + max_abs(analytic));
    return c;
}

DecayReport verify_strict_decay(const Trajectory& traj, const LyapunovPair& pair, const CompositeCertificate& cert,
                                std::optional<double> tol) {
    if (traj.size() == 0) throw InvalidInput("verify_strict_decay: empty trajectory");
    const double delta = cert.delta;

    DecayReport rep;
    rep.certificate = cert;
    rep.truncated = traj.truncated;

    const TimeSeries V1 = evaluate_along(traj, pair.V1);
    const TimeSeries V2 = evaluate_along(traj, pair.V2);
    rep.W_series = combine(V1, V2, [delta](double a, double b) { return a + delta * b; });
    rep.N1_series = evaluate_along(traj, pair.N1);
    rep.N2_series = evaluate_along(traj, pair.N2);
    for (const TimeSeries* n : {&rep.N1_series, &rep.N2_series}) {
        for (std::size_t k = 0; k < n->size(); ++k) {
            if ((*n)[k] < 0.0) {
                std::ostringstream os;
                os << "observable N" << (n == &rep.N1_series ? 1 : 2) << " = " << (*n)[k] << " < 0 at time index "
                   << k;
                throw HypothesisViolation(os.str());
            }
        }
    }
    for (const auto& [name, g] : pair.raw_observables) rep.raw_series.emplace(name, evaluate_along(traj, g));

    const bool have_analytic = pair.V1_dot.has_value() && (pair.single_function || pair.V2_dot.has_value());
    std::optional<TimeSeries> numeric;
    if (traj.size() >= 3) numeric = numerical_derivative(rep.W_series);

    if (have_analytic) {
        const TimeSeries d1 = evaluate_along(traj, *pair.V1_dot);
        const TimeSeries d2 = pair.V2_dot ? evaluate_along(traj, *pair.V2_dot) : TimeSeries(traj.times, std::vector<double>(traj.size(), 0.0));
        rep.Wdot_series = combine(d1, d2, [delta](double a, double b) { return a + delta * b; });
        rep.analytic_wdot = true;
        if (numeric) {
            const auto check = crosscheck_derivative(rep.Wdot_series, *numeric);
            rep.wdot_crosscheck_discrepancy = check.discrepancy;
            rep.wdot_crosscheck_tol = check.tolerance;
        }
    } else if (numeric) {
        rep.Wdot_series = *numeric;
    } else {
        // A single sample carries no derivative information.
        rep.Wdot_series = TimeSeries(traj.times, std::vector<double>(traj.size(), 0.0));
    }

    const double gamma = cert.gamma;
    const TimeSeries n_sum = combine(rep.N1_series, rep.N2_series, [](double a, double b) { return a + b; });
    rep.residual_series = combine(rep.Wdot_series, n_sum, [gamma](double wd, double n) { return wd + gamma * n; });

    rep.tol = tol ? *tol : 1e-6 * (1.0 + max_abs(rep.W_series));
    if (!(rep.tol > 0.0)) throw InvalidInput("verify_strict_decay: tol must be > 0");

    const std::size_t n = traj.size();
    rep.max_violation = -kInf;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = rep.residual_series[k];
        rep.max_violation = std::max(rep.max_violation, r);
        const bool boundary = k < 2 || k + 2 >= n;
        if (!boundary && r > rep.tol) rep.violation_times.push_back(traj.times[k]);
    }
    return rep;
}

IntegralReport integral_estimate(const DecayReport& report) {
    IntegralReport r;
    const TimeSeries n_sum =
        combine(report.N1_series, report.N2_series, [](double a, double b) { return a + b; });
    r.dissipation_integral = n_sum.size() >= 2 ? quadrature(n_sum) : 0.0;
    r.budget = (report.W_series.front() - report.W_series.back()) / report.certificate.gamma;
    r.satisfied = r.dissipation_integral <= r.budget * (1.0 + 1e-6) + 1e-9;
    r.W_limit_estimate = tail_mean(report.W_series, 1);
    return r;
}

VanishingReport observable_vanishing(const DecayReport& report, double threshold) {
    if (!(threshold >= 0.0)) throw InvalidInput("vanishing threshold must be >= 0");
    VanishingReport v;
    v.threshold = threshold;
    v.truncated = report.truncated;

    const std::size_t min_samples = report.truncated ? 1 : 20;
    v.terminal_N1 = tail_mean(report.N1_series, min_samples);
    v.terminal_N2 = tail_mean(report.N2_series, min_samples);
    for (const auto& [name, s] : report.raw_series) v.terminal_raw[name] = tail_mean(s, min_samples);

    const std::size_t start = tail_start(report.N1_series.times(), 0.05);
    for (const TimeSeries* s : {&report.N1_series, &report.N2_series}) {
        if (s->size() < 3) continue;
        const TimeSeries d = numerical_derivative(*s);
        for (std::size_t k = start; k < d.size(); ++k) v.uc_surrogate_bound = std::max(v.uc_surrogate_bound, std::abs(d[k]));
    }
    v.vanished = !v.truncated && v.terminal_N1 <= threshold && v.terminal_N2 <= threshold;
    return v;
}

}  // namespace lyacert
