#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/errors.hpp"

namespace lyacert {

using State = Eigen::VectorXd;
using VectorField = std::function<State(const State&)>;
using ScalarField = std::function<double(const State&)>;

/// Autonomous system x' = f(x) on R^dimension.
struct SystemSpec {
    std::string name;
    int dimension = 0;
    VectorField field;

    /// Evaluates f and checks the output dimension.
    State operator()(const State& x) const;
};

enum class IntegrationMethod { rk4, rk45 };

struct IntegratorConfig {
    IntegrationMethod method = IntegrationMethod::rk45;
    double t_end = 10.0;
    double dt_init = 1e-3;  // fixed step for rk4, first trial step for rk45
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    long max_steps = 2'000'000;
    // Unset: t_end / 2000. Zero: keep the accepted integrator steps.
    std::optional<double> dense_output_dt;

    void validate() const;
    double dense_dt() const;
};

/// States with norm above this mark the run as a blow-up.
inline constexpr double kBlowUpNorm = 1e12;

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::string system_name;
    bool truncated = false;

    std::size_t size() const { return times.size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

/// Scalar samples on a strictly increasing time grid.
class TimeSeries {
public:
    TimeSeries() = default;
    TimeSeries(std::vector<double> times, std::vector<double> values);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double time(std::size_t k) const { return times_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    /// Restriction to samples with lo <= t <= hi.
    TimeSeries window(double lo, double hi) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

Trajectory integrate(const SystemSpec& system, const State& x0, const IntegratorConfig& config);

TimeSeries evaluate_along(const Trajectory& traj, const ScalarField& g);

/// Second-order three-point stencils; valid on nonuniform grids.
TimeSeries numerical_derivative(const TimeSeries& series);

/// Trapezoidal rule over the stored grid.
double quadrature(const TimeSeries& series);

/// Pointwise combination of two series sharing a grid.
TimeSeries combine(const TimeSeries& a, const TimeSeries& b, const std::function<double(double, double)>& op);

/// Index of the first sample of the final `fraction` of the horizon.
std::size_t tail_start(const std::vector<double>& times, double fraction);

/// Mean over the final 5% of the horizon; throws if fewer than `min_samples` fall in it.
double tail_mean(const TimeSeries& series, std::size_t min_samples = 20);

}  // namespace lyacert
