#include "lyacert/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lyacert/parallel.hpp"

namespace lyacert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radical_inverse(std::size_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
};

std::optional<LinearFit> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    const double b = sxy / sxx;
    return LinearFit{my - b * mx, b};
}

void require_shared_grid(const TimeSeries& a, const TimeSeries& b, const char* what) {
    if (a.times() != b.times()) throw InvalidInput(std::string(what) + ": series are not on a shared grid");
}

}  // namespace

CriticalSetSpec CriticalSetSpec::point(State p) {
    CriticalSetSpec E;
    E.kind_ = CriticalSetKind::point;
    E.dimension_ = static_cast<int>(p.size());
    E.distance_ = [p](const State& x) { return (x - p).norm(); };
    E.sampler_ = [p](std::size_t) { return p; };
    E.projector_ = [p](const State&) { return p; };
    E.sample_count_ = 1;
    return E;
}

CriticalSetSpec CriticalSetSpec::affine(State basepoint, std::vector<State> directions) {
    const auto n = basepoint.size();
    if (directions.empty()) return point(std::move(basepoint));
    Eigen::MatrixXd D(n, static_cast<Eigen::Index>(directions.size()));
    for (std::size_t j = 0; j < directions.size(); ++j) {
        if (directions[j].size() != n) throw InvalidInput("affine critical set: direction dimension mismatch");
        D.col(static_cast<Eigen::Index>(j)) = directions[j];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
    const auto rank = qr.rank();
    if (rank == 0) return point(std::move(basepoint));
    const Eigen::MatrixXd Q = Eigen::MatrixXd(qr.householderQ()).leftCols(rank);

    CriticalSetSpec E;
    E.kind_ = CriticalSetKind::affine_subspace;
    E.dimension_ = static_cast<int>(n);
    E.distance_ = [basepoint, Q](const State& x) {
        const State d = x - basepoint;
        return (d - Q * (Q.transpose() * d)).norm();
    };
    E.projector_ = [basepoint, Q](const State& x) -> State {
        return basepoint + Q * (Q.transpose() * (x - basepoint));
    };
    E.sampler_ = [basepoint, Q](std::size_t index) {
        State z = basepoint;
        if (index == 0) return z;
        for (Eigen::Index j = 0; j < Q.cols(); ++j) {
            const unsigned base = kPrimes[static_cast<std::size_t>(j) % std::size(kPrimes)];
            const double coeff = 2.0 * (2.0 * radical_inverse(index + 1, base) - 1.0);
            z += coeff * Q.col(j);
        }
        return z;
    };
    return E;
}

CriticalSetSpec CriticalSetSpec::product(std::vector<CriticalSetSpec> factors) {
    if (factors.empty()) throw InvalidInput("product critical set needs at least one factor");
    int dim = 0;
    bool all_points = true, all_sample = true, all_project = true;
    for (const auto& f : factors) {
        dim += f.dimension();
        all_points = all_points && f.kind() == CriticalSetKind::point;
        all_sample = all_sample && f.has_sampler();
        all_project = all_project && f.has_projector();
    }
    if (all_points) {
        State p(dim);
        int off = 0;
        for (const auto& f : factors) {
            p.segment(off, f.dimension()) = f.sample(0);
            off += f.dimension();
        }
        return point(std::move(p));
    }
    CriticalSetSpec E;
    E.kind_ = CriticalSetKind::product;
    E.dimension_ = dim;
    E.distance_ = [factors](const State& x) {
        double s = 0.0;
        int off = 0;
        for (const auto& f : factors) {
            const double d = f.distance(x.segment(off, f.dimension()));
            s += d * d;
            off += f.dimension();
        }
        return std::sqrt(s);
    };
    if (all_sample) {
        E.sampler_ = [factors, dim](std::size_t index) {
            State z(dim);
            int off = 0;
            for (const auto& f : factors) {
                z.segment(off, f.dimension()) = f.sample(index);
                off += f.dimension();
            }
            return z;
        };
    }
    if (all_project) {
        E.projector_ = [factors, dim](const State& x) {
            State z(dim);
            int off = 0;
            for (const auto& f : factors) {
                z.segment(off, f.dimension()) = f.project(x.segment(off, f.dimension()));
                off += f.dimension();
            }
            return z;
        };
    }
    return E;
}

CriticalSetSpec CriticalSetSpec::custom(int dimension, std::function<double(const State&)> distance,
                                        std::optional<Sampler> sampler) {
    if (dimension <= 0 || !distance) throw InvalidInput("custom critical set needs a dimension and a distance");
    CriticalSetSpec E;
    E.kind_ = CriticalSetKind::custom;
    E.dimension_ = dimension;
    E.distance_ = std::move(distance);
    if (sampler) E.sampler_ = std::move(*sampler);
    return E;
}

double CriticalSetSpec::distance(const State& x) const {
    if (x.size() != dimension_) {
        std::ostringstream os;
        os << "critical set has dimension " << dimension_ << ", state has " << x.size();
        throw InvalidInput(os.str());
    }
    return distance_(x);
}

State CriticalSetSpec::project(const State& x) const {
    if (!projector_) throw InvalidInput("critical set has no projector");
    if (x.size() != dimension_) throw InvalidInput("critical set projection: dimension mismatch");
    return projector_(x);
}

State CriticalSetSpec::sample(std::size_t index) const {
    if (!sampler_) throw InvalidInput("critical set has no equilibria sampler");
    return sampler_(index);
}

void ErrorBoundParams::validate() const {
    if (!(c > 0.0)) throw InvalidInput("error_bound.c must be > 0");
    if (!(neighborhood_radius > 0.0)) throw InvalidInput("error_bound.neighborhood_radius must be > 0");
    if (c1 && !(*c1 > 0.0)) throw InvalidInput("error_bound.c1 must be > 0");
    if (c2 && !(*c2 > 0.0)) throw InvalidInput("error_bound.c2 must be > 0");
    if (c1 && c2 && std::abs(*c1 + *c2 - c) > 1e-12 * std::max(1.0, c))
        throw InvalidInput("error_bound: c must equal c1 + c2");
}

void QuadraticGrowthParams::validate() const {
    if (!(m > 0.0)) throw InvalidInput("quadratic_growth.m must be > 0");
    if (!(r > 0.0)) throw InvalidInput("quadratic_growth.r must be > 0");
    if (!std::isfinite(W_infinity)) throw InvalidInput("quadratic_growth.W_infinity must be finite");
}

TimeSeries distance_series(const Trajectory& traj, const CriticalSetSpec& E) {
    return evaluate_along(traj, [&E](const State& x) { return E.distance(x); });
}

ConvergenceCheck check_convergence_to_E(const TimeSeries& dist, double threshold) {
    ConvergenceCheck c;
    c.threshold = threshold;
    c.terminal_mean = tail_mean(dist, 20);
    for (std::size_t k = tail_start(dist.times(), 0.05); k < dist.size(); ++k)
        c.terminal_max = std::max(c.terminal_max, dist[k]);
    c.pass = c.terminal_mean <= threshold;
    return c;
}

double estimate_W_infinity(const TimeSeries& W_series) { return tail_mean(W_series, 1); }

double rate_constant_K(const TimeSeries& W_series, double gamma, double c) {
    if (!(gamma > 0.0) || !(c > 0.0)) throw InvalidInput("rate constant needs gamma > 0 and c > 0");
    const double gap = std::max(0.0, W_series.front() - estimate_W_infinity(W_series));
    return std::sqrt(gap / (gamma * c));
}

L2Report l2_distance_bound(const TimeSeries& dist, const DecayReport& decay, const ErrorBoundParams& eb) {
    eb.validate();
    require_shared_grid(dist, decay.W_series, "l2_distance_bound");
    const double gamma = decay.certificate.gamma;
    if (!(gamma > 0.0)) throw InvalidInput("l2_distance_bound: gamma must be > 0");

    L2Report r;
    const TimeSeries dist_sq = combine(dist, dist, [](double a, double b) { return a * b; });
    r.integral_dist_sq = dist_sq.size() >= 2 ? quadrature(dist_sq) : 0.0;
    r.W_infinity = estimate_W_infinity(decay.W_series);
    r.budget = std::max(0.0, decay.W_series.front() - r.W_infinity) / (gamma * eb.c);
    r.bound_pass = r.integral_dist_sq <= r.budget * (1.0 + 1e-6) + 1e-9;

    double worst1 = kInf, worst2 = kInf;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        const double d = dist[k];
        if (!(d > 1e-150) || d > eb.neighborhood_radius) continue;
        ++r.samples_in_neighborhood;
        const double d2 = d * d;
        r.worst_ratio = std::min(r.worst_ratio, (decay.N1_series[k] + decay.N2_series[k]) / (eb.c * d2));
        if (eb.c1) worst1 = std::min(worst1, decay.N1_series[k] / (*eb.c1 * d2));
        if (eb.c2) worst2 = std::min(worst2, decay.N2_series[k] / (*eb.c2 * d2));
    }
    constexpr double slack = 1.0 - 1e-9;
    r.error_bound_pass = r.worst_ratio >= slack;
    if (eb.c1) {
        r.worst_ratio_N1 = worst1;
        r.error_bound_pass = r.error_bound_pass && worst1 >= slack;
    }
    if (eb.c2) {
        r.worst_ratio_N2 = worst2;
        r.error_bound_pass = r.error_bound_pass && worst2 >= slack;
    }
    return r;
}

bool RateReport::windows_pass() const {
    return std::all_of(window_checks.begin(), window_checks.end(), [](const WindowCheck& w) { return w.pass; });
}

std::vector<double> default_window_grid(double horizon) {
    return {horizon / 64, horizon / 32, horizon / 16, horizon / 8, horizon / 4, horizon / 2};
}

RateReport subsequence_rate(const TimeSeries& dist, double K, std::vector<double> T_grid) {
    if (dist.empty()) throw InvalidInput("subsequence_rate: empty distance series");
    if (!(K >= 0.0)) throw InvalidInput("subsequence_rate: K must be >= 0");
    const double H = dist.times().back();
    if (T_grid.empty()) T_grid = default_window_grid(H);

    RateReport r;
    r.K = K;
    for (double T : T_grid) {
        std::ostringstream note;
        if (!(T > 0.0) || 2.0 * T > H * (1.0 + 1e-12)) {
            note << "window T = " << T << " skipped: needs 0 < 2T <= horizon " << H;
            r.notes.push_back(note.str());
            continue;
        }
        const TimeSeries w = dist.window(T, 2.0 * T);
        if (w.empty()) {
            note << "window T = " << T << " skipped: no samples in [T, 2T]";
            r.notes.push_back(note.str());
            continue;
        }
        WindowCheck c;
        c.T = T;
        c.min_dist = *std::min_element(w.values().begin(), w.values().end());
        c.bound = K / std::sqrt(T);
        c.pass = c.min_dist <= c.bound;
        r.window_checks.push_back(c);
    }
    return r;
}

RateReport pointwise_rate(const TimeSeries& dist, double tail_fraction_start) {
    if (dist.empty()) throw InvalidInput("pointwise_rate: empty distance series");
    if (!(tail_fraction_start >= 0.0 && tail_fraction_start < 1.0))
        throw InvalidInput("pointwise_rate: tail start fraction must lie in [0, 1)");
    const double H = dist.times().back();
    const TimeSeries tail = dist.window(tail_fraction_start * H, H);
    if (tail.size() < 50) {
        std::ostringstream os;
        os << "pointwise_rate: tail holds " << tail.size() << " samples, need at least 50";
        throw InvalidInput(os.str());
    }

    RateReport r;
    r.tail_start_time = tail.time(0);
    r.monotone_tail = true;
    for (std::size_t k = 1; k < tail.size(); ++k)
        if (tail[k] > tail[k - 1] + 1e-9) r.monotone_tail = false;

    std::vector<double> lt, ld;
    for (std::size_t k = 0; k < tail.size(); ++k) {
        if (tail.time(k) > 0.0 && tail[k] > 1e-14) {
            lt.push_back(std::log(tail.time(k)));
            ld.push_back(std::log(tail[k]));
        }
    }
    r.fit_samples = lt.size();
    const auto fit = least_squares(lt, ld);
    if (fit) {
        r.C_fit = std::exp(fit->intercept);
        r.exponent_fit = -fit->slope;
        r.envelope_holds = true;
        for (std::size_t k = 0; k < tail.size(); ++k) {
            const double t = tail.time(k);
            if (t > 0.0 && tail[k] > *r.C_fit / std::sqrt(t) * (1.0 + 1e-9)) r.envelope_holds = false;
        }
        r.pointwise_pass = r.monotone_tail && (*r.exponent_fit >= 0.5 - 0.05 || r.envelope_holds);
    } else {
        r.notes.push_back("tail distances at or below 1e-14; no power-law fit, treated as faster than any power");
        r.envelope_holds = true;
        r.pointwise_pass = r.monotone_tail;
    }
    return r;
}

RateReport rate_report(const TimeSeries& dist, double K, const ErrorBoundParams& eb, std::vector<double> T_grid,
                       double tail_fraction_start) {
    RateReport r = subsequence_rate(dist, K, std::move(T_grid));
    const RateReport p = pointwise_rate(dist, tail_fraction_start);
    r.C_fit = p.C_fit;
    r.exponent_fit = p.exponent_fit;
    r.fit_samples = p.fit_samples;
    r.monotone_tail = p.monotone_tail;
    r.envelope_holds = p.envelope_holds;
    r.pointwise_pass = p.pointwise_pass;
    r.tail_start_time = p.tail_start_time;
    r.notes.insert(r.notes.end(), p.notes.begin(), p.notes.end());

    const std::size_t n = dist.size();
    std::size_t k = n;
    while (k > 0 && dist[k - 1] <= eb.neighborhood_radius) --k;
    if (k < n) r.t_entry = dist.time(k);
    std::size_t m = n - 1;
    while (m > 0 && dist[m] <= dist[m - 1] + 1e-9) --m;
    r.t_monotone = dist.time(m);
    return r;
}

ExponentialReport exponential_rate(const TimeSeries& dist, const TimeSeries& W_series, const QuadraticGrowthParams& qg,
                                   double gamma, double c, double resolution_floor) {
    qg.validate();
    require_shared_grid(dist, W_series, "exponential_rate");
    if (!(gamma > 0.0) || !(c > 0.0)) throw InvalidInput("exponential_rate needs gamma > 0 and c > 0");

    ExponentialReport r;
    r.rate = gamma * c / (2.0 * qg.m);
    const std::size_t n = dist.size();
    std::size_t i0 = n;
    while (i0 > 0 && dist[i0 - 1] <= qg.r) --i0;
    if (i0 == n) {
        r.note = "distance never stays within the quadratic-growth radius; not applicable";
        return r;
    }
    r.applicable = true;
    r.t0 = dist.time(i0);
    r.W_t0 = W_series[i0];

    const double amp = std::sqrt(std::max(0.0, r.W_t0 - qg.W_infinity) / qg.m);
    r.envelope_pass = true;
    r.growth_pass = true;
    r.worst_growth_margin = kInf;
    std::vector<double> ft, fg;
    for (std::size_t k = i0; k < n; ++k) {
        const double t = dist.time(k);
        const double d = dist[k];
        const double env = amp * std::exp(-r.rate * (t - r.t0));
        const bool resolvable = d >= resolution_floor || env >= resolution_floor;
        if (resolvable) ++r.samples_compared;
        const double ratio = d == 0.0 ? 0.0 : (env > 0.0 ? d / env : kInf);
        if (resolvable) {
            r.worst_envelope_ratio = std::max(r.worst_envelope_ratio, ratio);
            if (d > env * (1.0 + 1e-3)) r.envelope_pass = false;
        }

        const double gap = W_series[k] - qg.W_infinity;
        const double floor = qg.m * d * d;
        const double margin = gap - floor;
        r.worst_growth_margin = std::min(r.worst_growth_margin, margin);
        if (margin < -1e-9 * (std::abs(gap) + floor) - 1e-300) r.growth_pass = false;

        if (gap > 0.0) {
            ft.push_back(t);
            fg.push_back(std::log(gap));
        }
    }
    if (const auto fit = least_squares(ft, fg)) r.fitted_W_decay_rate = -fit->slope;
    return r;
}

void ProbeConfig::validate() const {
    if (equilibria == 0) throw InvalidInput("probe.equilibria must be >= 1");
    if (radii.empty()) throw InvalidInput("probe.radii must not be empty");
    for (double r : radii)
        if (!(r > 0.0)) throw InvalidInput("probe.radii entries must be > 0");
    if (directions_per_radius == 0) throw InvalidInput("probe.directions_per_radius must be >= 1");
    if (!(excursion_factor > 0.0)) throw InvalidInput("probe.excursion_factor must be > 0");
    if (!(convergence_threshold > 0.0)) throw InvalidInput("probe.convergence_threshold must be > 0");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::AS: return "AS";
        case Verdict::SS: return "SS";
        case Verdict::PAS: return "PAS";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

double limit_drift(const Trajectory& traj) {
    const std::size_t start = tail_start(traj.times, 0.05);
    double diam = 0.0;
    for (std::size_t i = start; i < traj.size(); ++i)
        for (std::size_t j = i + 1; j < traj.size(); ++j) diam = std::max(diam, (traj.states[i] - traj.states[j]).norm());
    return diam;
}

StabilityVerdict classify_stability(const SystemSpec& system, const CriticalSetSpec& E, const ProbeConfig& probe,
                                    const IntegratorConfig& integ, bool E_is_equilibrium_set) {
    probe.validate();
    integ.validate();
    if (E.kind() != CriticalSetKind::point && !E.has_sampler())
        throw InvalidInput("classify_stability: critical set needs an equilibria sampler");
    if (E.dimension() != system.dimension)
        throw InvalidInput("classify_stability: critical set and system dimensions differ");

    const std::size_t n_eq = std::min(probe.equilibria, E.sample_count().value_or(probe.equilibria));

    struct Probe {
        std::size_t eq;
        std::size_t radius_index;
        std::size_t dir;
        State z;
        State x0;
    };
    std::vector<Probe> probes;
    std::mt19937_64 rng(probe.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n_eq; ++i) {
        const State z = E.sample(i);
        for (std::size_t ri = 0; ri < probe.radii.size(); ++ri) {
            for (std::size_t j = 0; j < probe.directions_per_radius; ++j) {
                State u(system.dimension);
                do {
                    for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = normal(rng);
                } while (u.norm() == 0.0);
                u.normalize();
                probes.push_back({i, ri, j, z, z + probe.radii[ri] * u});
            }
        }
    }

    StabilityVerdict v;
    v.seed = probe.seed;
    v.lyapunov_stability_table.resize(probes.size());
    v.convergence_table.resize(probes.size());

    parallel_for(probes.size(), probe.threads, [&](std::size_t p) {
        const Probe& pr = probes[p];
        const double r = probe.radii[pr.radius_index];
        const Trajectory traj = integrate(system, pr.x0, integ);

        StabilityRow s;
        s.equilibrium_index = pr.eq;
        s.equilibrium = pr.z;
        s.r_probe = r;
        s.direction_index = pr.dir;
        for (const State& x : traj.states) s.max_excursion = std::max(s.max_excursion, (x - pr.z).norm());
        if (traj.truncated) s.max_excursion = std::max(s.max_excursion, kBlowUpNorm);
        s.ratio = s.max_excursion / r;
        s.stable = s.max_excursion <= probe.excursion_factor * r;
        v.lyapunov_stability_table[p] = s;

        ConvergenceRow c;
        c.equilibrium_index = pr.eq;
        c.r_probe = r;
        c.direction_index = pr.dir;
        c.truncated = traj.truncated;
        c.terminal_dist = tail_mean(distance_series(traj, E), 1);
        c.limit_drift = limit_drift(traj);
        c.converged = !traj.truncated && c.limit_drift <= probe.convergence_threshold &&
                      c.terminal_dist <= probe.convergence_threshold;
        v.convergence_table[p] = c;
    });

    v.stability_probe_pass = std::all_of(v.lyapunov_stability_table.begin(), v.lyapunov_stability_table.end(),
                                         [](const StabilityRow& s) { return s.stable; });
    v.convergence_probe_pass = std::all_of(v.convergence_table.begin(), v.convergence_table.end(),
                                           [](const ConvergenceRow& c) { return c.converged; });
    if (v.stability_probe_pass && v.convergence_probe_pass) {
        if (E.kind() == CriticalSetKind::point)
            v.verdict = Verdict::AS;
        else if (E_is_equilibrium_set)
            v.verdict = Verdict::SS;
        else
            v.verdict = Verdict::PAS;
    }
    return v;
}

}  // namespace lyacert
