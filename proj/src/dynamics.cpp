#include "lyacert/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace lyacert {

State SystemSpec::operator()(const State& x) const {
    State y = field(x);
    if (y.size() != dimension) {
        std::ostringstream os;
        os << "system '" << name << "': field returned dimension " << y.size() << ", expected "
           << dimension;
        throw InvalidInput(os.str());
    }
    return y;
}

void IntegratorConfig::validate() const {
    if (!(t_end > 0.0)) throw InvalidInput("integrator.t_end must be > 0");
    if (!(dt_init > 0.0)) throw InvalidInput("integrator.dt_init must be > 0");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InvalidInput("integrator tolerances must be > 0");
    if (max_steps < 1) throw InvalidInput("integrator.max_steps must be >= 1");
    if (dense_output_dt && *dense_output_dt < 0.0)
        throw InvalidInput("integrator.dense_output_dt must be >= 0");
}

double IntegratorConfig::dense_dt() const { return dense_output_dt ? *dense_output_dt : t_end / 2000.0; }

TimeSeries::TimeSeries(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size())
        throw InvalidInput("time series: times and values differ in length");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] > times_[k - 1]))
            throw InvalidInput("time series: times not strictly increasing at index " + std::to_string(k));
}

TimeSeries TimeSeries::window(double lo, double hi) const {
    std::vector<double> t, v;
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (times_[k] >= lo && times_[k] <= hi) {
            t.push_back(times_[k]);
            v.push_back(values_[k]);
        }
    }
    return {std::move(t), std::move(v)};
}

namespace {

bool finite(const State& x) { return x.allFinite(); }

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct RawSolution {
    std::vector<double> t;
    std::vector<State> y;
    std::vector<State> dy;
    bool truncated = false;
};

bool admissible(const State& y) { return finite(y) && y.norm() <= kBlowUpNorm; }

RawSolution solve_rk45(const SystemSpec& sys, const State& x0, const State& f0, const IntegratorConfig& cfg) {
    RawSolution out;
    out.t.push_back(0.0);
    out.y.push_back(x0);
    out.dy.push_back(f0);

    double t = 0.0;
    double h = std::min(cfg.dt_init, cfg.t_end);
    State y = x0, k1 = f0;
    long steps = 0;
    bool last_rejected = false;
    const double eps = std::numeric_limits<double>::epsilon();

    while (t < cfg.t_end) {
        if (steps >= cfg.max_steps) {
            out.truncated = true;
            break;
        }
        if (h < 16.0 * eps * std::max(1.0, std::abs(t))) {
            out.truncated = true;
            break;
        }
        bool final_step = false;
        if (t + h >= cfg.t_end) {
            h = cfg.t_end - t;
            final_step = true;
        }
        ++steps;

        const State k2 = sys(y + h * (a21 * k1));
        const State k3 = sys(y + h * (a31 * k1 + a32 * k2));
        const State k4 = sys(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = sys(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = sys(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = finite(y_new) ? sys(y_new) : y_new;
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err_norm = std::numeric_limits<double>::infinity();
        if (finite(err) && finite(k7)) {
            const Eigen::ArrayXd scale =
                cfg.abs_tol + cfg.rel_tol * y.array().abs().max(y_new.array().abs());
            err_norm = std::sqrt((err.array() / scale).square().mean());
        }

        if (err_norm <= 1.0) {
            if (!admissible(y_new)) {
                out.truncated = true;
                break;
            }
            t = final_step ? cfg.t_end : t + h;
            y = y_new;
            k1 = k7;
            out.t.push_back(t);
            out.y.push_back(y);
            out.dy.push_back(k1);
            double fac = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            h *= fac;
            last_rejected = false;
        } else {
            const double fac = std::isfinite(err_norm) ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 1.0)
                                                       : 0.2;
            h *= fac;
            last_rejected = true;
        }
    }
    return out;
}

RawSolution solve_rk4(const SystemSpec& sys, const State& x0, const State& f0, const IntegratorConfig& cfg) {
    RawSolution out;
    out.t.push_back(0.0);
    out.y.push_back(x0);
    out.dy.push_back(f0);

    const long n_steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt_init - 1e-9));
    State y = x0, k1 = f0;
    for (long n = 0; n < n_steps; ++n) {
        if (n >= cfg.max_steps) {
            out.truncated = true;
            break;
        }
        const double t = out.t.back();
        const double t_next = (n + 1 == n_steps) ? cfg.t_end : (n + 1) * cfg.dt_init;
        const double h = t_next - t;
        const State k2 = sys(y + 0.5 * h * k1);
        const State k3 = sys(y + 0.5 * h * k2);
        const State k4 = sys(y + h * k3);
        const State y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!admissible(y_new)) {
            out.truncated = true;
            break;
        }
        const State f_new = sys(y_new);
        if (!finite(f_new)) {
            out.truncated = true;
            break;
        }
        y = y_new;
        k1 = f_new;
        out.t.push_back(t_next);
        out.y.push_back(y);
        out.dy.push_back(k1);
    }
    return out;
}

std::vector<double> uniform_grid(double t_last, double dt) {
    std::vector<double> grid;
    const double ratio = t_last / dt;
    const double n_round = std::round(ratio);
    if (std::abs(ratio - n_round) <= 1e-9 * std::max(1.0, ratio) && n_round >= 1.0) {
        const auto n = static_cast<long>(n_round);
        grid.reserve(n + 1);
        for (long k = 0; k <= n; ++k) grid.push_back(k == n ? t_last : t_last * static_cast<double>(k) / n_round);
        return grid;
    }
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t >= t_last - 1e-12 * std::max(1.0, t_last)) break;
        grid.push_back(t);
    }
    grid.push_back(t_last);
    return grid;
}

// Cubic Hermite on [t0, t1]; written as y0 + increments so a constant solution is reproduced exactly.
State hermite(double t0, double t1, const State& y0, const State& y1, const State& f0, const State& f1,
              double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h11 = s3 - s2;
    return y0 + h01 * (y1 - y0) + h * (h10 * f0 + h11 * f1);
}

}  // namespace

Trajectory integrate(const SystemSpec& system, const State& x0, const IntegratorConfig& config) {
    config.validate();
    if (x0.size() != system.dimension) {
        std::ostringstream os;
        os << "initial state has dimension " << x0.size() << " but system '" << system.name
           << "' has dimension " << system.dimension;
        throw InvalidInput(os.str());
    }
    if (!finite(x0)) throw InvalidInput("initial state is not finite");
    const State f0 = system(x0);
    if (!finite(f0)) throw InvalidInput("vector field is not finite at the initial state");

    RawSolution raw = config.method == IntegrationMethod::rk45 ? solve_rk45(system, x0, f0, config)
                                                               : solve_rk4(system, x0, f0, config);

    Trajectory traj;
    traj.system_name = system.name;
    traj.truncated = raw.truncated;

    const double dt = config.dense_dt();
    if (dt <= 0.0 || raw.t.size() < 2) {
        traj.times = std::move(raw.t);
        traj.states = std::move(raw.y);
        return traj;
    }

    const std::vector<double> grid = uniform_grid(raw.t.back(), dt);
    traj.times.reserve(grid.size());
    traj.states.reserve(grid.size());
    std::size_t seg = 0;
    for (double t : grid) {
        while (seg + 2 < raw.t.size() && raw.t[seg + 1] < t) ++seg;
        State y;
        if (t == raw.t[seg]) {
            y = raw.y[seg];
        } else if (t == raw.t[seg + 1]) {
            y = raw.y[seg + 1];
        } else {
            y = hermite(raw.t[seg], raw.t[seg + 1], raw.y[seg], raw.y[seg + 1], raw.dy[seg], raw.dy[seg + 1], t);
        }
        traj.times.push_back(t);
        traj.states.push_back(std::move(y));
    }
    return traj;
}

TimeSeries evaluate_along(const Trajectory& traj, const ScalarField& g) {
    std::vector<double> values;
    values.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double v = g(traj.states[k]);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "observable is not finite at time index " << k << " (t = " << traj.times[k] << ")";
            throw EvaluationError(os.str());
        }
        values.push_back(v);
    }
    return {traj.times, std::move(values)};
}

TimeSeries numerical_derivative(const TimeSeries& series) {
    const std::size_t n = series.size();
    if (n < 3) throw InvalidInput("numerical_derivative needs at least 3 samples");
    const auto& t = series.times();
    const auto& y = series.values();

    // Derivative at t[j] of the quadratic through (t[i], t[i+1], t[i+2]).
    auto three_point = [&](std::size_t i, std::size_t j) {
        const double t0 = t[i], t1 = t[i + 1], t2 = t[i + 2], x = t[j];
        const double d0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
        const double d2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
        // The weights sum to zero; differencing against the middle sample keeps constants exact.
        return d0 * (y[i] - y[i + 1]) + d2 * (y[i + 2] - y[i + 1]);
    };

    std::vector<double> d(n);
    d[0] = three_point(0, 0);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = three_point(k - 1, k);
    d[n - 1] = three_point(n - 3, n - 1);
    return {series.times(), std::move(d)};
}

double quadrature(const TimeSeries& series) {
    if (series.size() < 2) throw InvalidInput("quadrature needs at least 2 samples");
    const auto& t = series.times();
    const auto& y = series.values();
    double sum = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) sum += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return sum;
}

TimeSeries combine(const TimeSeries& a, const TimeSeries& b, const std::function<double(double, double)>& op) {
    if (a.times() != b.times()) throw InvalidInput("series are not on a shared grid");
    std::vector<double> v(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) v[k] = op(a[k], b[k]);
    return {a.times(), std::move(v)};
}

std::size_t tail_start(const std::vector<double>& times, double fraction) {
    if (times.empty()) return 0;
    const double cut = times.back() - fraction * (times.back() - times.front());
    const auto it = std::lower_bound(times.begin(), times.end(), cut);
    return static_cast<std::size_t>(it - times.begin());
}

double tail_mean(const TimeSeries& series, std::size_t min_samples) {
    const std::size_t start = tail_start(series.times(), 0.05);
    const std::size_t count = series.size() - start;
    if (count < min_samples) {
        std::ostringstream os;
        os << "final 5% window holds " << count << " samples, need at least " << min_samples;
        throw InvalidInput(os.str());
    }
    double sum = 0.0;
    for (std::size_t k = start; k < series.size(); ++k) sum += series[k];
    return sum / static_cast<double>(count);
}

}  // namespace lyacert
