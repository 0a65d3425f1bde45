#include <doctest.h>

#include <cmath>
#include <random>

#include "lyacert/dynamics.hpp"
#include "lyacert/errors.hpp"

using namespace lyacert;

namespace {

SystemSpec linear_decay() {
    return {"decay", 1, [](const State& x) -> State { return -x; }};
}

State s1(double v) { return (State(1) << v).finished(); }

IntegratorConfig horizon(double t_end) {
    IntegratorConfig c;
    c.t_end = t_end;
    return c;
}

TimeSeries sampled(double t0, double t1, double dt, const std::function<double(double)>& g) {
    std::vector<double> t, v;
    const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
    for (std::size_t k = 0; k <= n; ++k) {
        t.push_back(t0 + dt * static_cast<double>(k));
        v.push_back(g(t.back()));
    }
    return {t, v};
}

}  // namespace

TEST_CASE("scalar decay reaches exp(-1) at t = 1") {
    const Trajectory tr = integrate(linear_decay(), s1(1.0), horizon(1.0));
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == doctest::Approx(1.0).epsilon(1e-14));
    // oracle: exp(-1)
    CHECK(std::abs(tr.states.back()[0] - 0.36787944117144233) <= 1e-6);
    CHECK_FALSE(tr.truncated);
}

TEST_CASE("zero field keeps the state bit-for-bit") {
    const SystemSpec zero{"zero", 2, [](const State& x) -> State { return State::Zero(x.size()); }};
    const State x0 = (State(2) << 3.0, -2.0).finished();
    for (auto method : {IntegrationMethod::rk45, IntegrationMethod::rk4}) {
        IntegratorConfig c = horizon(7.5);
        c.method = method;
        const Trajectory tr = integrate(zero, x0, c);
        for (const auto& s : tr.states) {
            CHECK(s[0] == 3.0);
            CHECK(s[1] == -2.0);
        }
    }
}

TEST_CASE("finite-time blow-up is flagged before t = 1") {
    const SystemSpec sq{"square", 1, [](const State& x) -> State { return x.cwiseProduct(x); }};
    const Trajectory tr = integrate(sq, s1(1.0), horizon(2.0));
    CHECK(tr.truncated);
    CHECK(tr.horizon() < 1.0);
    for (const auto& s : tr.states) CHECK(std::isfinite(s[0]));
}

TEST_CASE("integrate rejects bad input") {
    CHECK_THROWS_AS(integrate(linear_decay(), State::Zero(2), horizon(1.0)), InvalidInput);
    const SystemSpec nan_field{"nan", 1, [](const State& x) -> State { return x * std::nan(""); }};
    CHECK_THROWS_AS(integrate(nan_field, s1(1.0), horizon(1.0)), InvalidInput);
    IntegratorConfig bad = horizon(0.0);
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = horizon(1.0);
    bad.abs_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = horizon(1.0);
    bad.max_steps = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("default dense grid has t_end / 2000 spacing") {
    const Trajectory tr = integrate(linear_decay(), s1(1.0), horizon(10.0));
    CHECK(tr.size() == 2001);
    CHECK(tr.times[1] == doctest::Approx(0.005));
}

TEST_CASE("fixed-step RK4 matches the closed form") {
    IntegratorConfig c = horizon(2.0);
    c.method = IntegrationMethod::rk4;
    c.dt_init = 1e-3;
    const Trajectory tr = integrate(linear_decay(), s1(1.0), c);
    CHECK(std::abs(tr.states.back()[0] - std::exp(-2.0)) <= 1e-10);
}

TEST_CASE("max_steps exhaustion sets truncated") {
    IntegratorConfig c = horizon(10.0);
    c.max_steps = 5;
    const Trajectory tr = integrate(linear_decay(), s1(1.0), c);
    CHECK(tr.truncated);
}

TEST_CASE("property: tighter tolerances never increase the terminal error") {
    double previous = std::numeric_limits<double>::infinity();
    for (double tol = 1e-4; tol >= 1e-11; tol /= 2.0) {
        IntegratorConfig c = horizon(5.0);
        c.abs_tol = c.rel_tol = tol;
        const double err = std::abs(integrate(linear_decay(), s1(1.0), c).states.back()[0] - std::exp(-5.0));
        CHECK(err <= previous * (1.0 + 1e-12) + 1e-15);
        previous = err;
    }
}

TEST_CASE("evaluate_along") {
    const SystemSpec zero{"zero", 2, [](const State& x) -> State { return State::Zero(x.size()); }};
    const Trajectory still = integrate(zero, (State(2) << 3.0, -2.0).finished(), horizon(1.0));
    const TimeSeries sq = evaluate_along(still, [](const State& x) { return x.squaredNorm(); });
    for (double v : sq.values()) CHECK(v == 13.0);

    const Trajectory tr = integrate(linear_decay(), s1(1.0), horizon(3.0));
    const TimeSeries id = evaluate_along(tr, [](const State& x) { return x[0]; });
    const TimeSeries x2 = evaluate_along(tr, [](const State& x) { return x[0] * x[0]; });
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(id[k] == tr.states[k][0]);
        CHECK(std::abs(x2[k] - std::exp(-2.0 * tr.times[k])) <= 1e-6);
    }

    SUBCASE("non-finite observable names the time index") {
        try {
            evaluate_along(tr, [](const State& x) { return x[0] < 0.5 ? std::nan("") : 1.0; });
            FAIL("expected an evaluation error");
        } catch (const EvaluationError& e) {
            CHECK(std::string(e.what()).find("index") != std::string::npos);
        }
    }
}

TEST_CASE("numerical_derivative") {
    const TimeSeries sq = sampled(0.0, 1.0, 0.01, [](double t) { return t * t; });
    const TimeSeries d = numerical_derivative(sq);
    CHECK(d.times() == sq.times());
    for (std::size_t k = 0; k < d.size(); ++k) CHECK(std::abs(d[k] - 2.0 * d.time(k)) <= 1e-3);

    const TimeSeries flat = sampled(0.0, 1.0, 0.1, [](double) { return 4.2; });
    const TimeSeries dflat = numerical_derivative(flat);
    for (double v : dflat.values()) CHECK(v == 0.0);

    const TimeSeries sn = sampled(0.0, 3.0, 0.001, [](double t) { return std::sin(t); });
    const TimeSeries ds = numerical_derivative(sn);
    for (std::size_t k = 0; k < ds.size(); ++k) CHECK(std::abs(ds[k] - std::cos(ds.time(k))) <= 1e-5);

    SUBCASE("nonuniform grid is exact for quadratics") {
        const TimeSeries q({0.0, 0.1, 0.35, 0.4, 1.0}, {0.0, 0.01, 0.1225, 0.16, 1.0});
        const TimeSeries dq = numerical_derivative(q);
        for (std::size_t k = 0; k < dq.size(); ++k) CHECK(dq[k] == doctest::Approx(2.0 * dq.time(k)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(numerical_derivative(TimeSeries({0.0, 1.0}, {0.0, 1.0})), InvalidInput);
}

TEST_CASE("quadrature") {
    CHECK(quadrature(TimeSeries({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0})) == 2.0);
    // oracle: (1 - exp(-20)) / 2
    const TimeSeries e2 = sampled(0.0, 10.0, 0.001, [](double t) { return std::exp(-2.0 * t); });
    CHECK(std::abs(quadrature(e2) - 0.49999999897942) <= 1e-4);
    CHECK(quadrature(TimeSeries({0.0, 0.5, 2.0}, {0.0, 0.5, 2.0})) == 2.0);
    CHECK_THROWS_AS(quadrature(TimeSeries({0.0}, {1.0})), InvalidInput);
}

TEST_CASE("property: quadrature is nonnegative and additive over splits") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 40;
        std::vector<double> t{0.0}, v{u(rng)};
        for (std::size_t k = 1; k < n; ++k) {
            t.push_back(t.back() + 1e-3 + u(rng));
            v.push_back(u(rng) * 5.0);
        }
        const TimeSeries s(t, v);
        CHECK(quadrature(s) >= 0.0);
        const std::size_t split = 1 + rng() % (n - 2);
        const TimeSeries left({t.begin(), t.begin() + split + 1}, {v.begin(), v.begin() + split + 1});
        const TimeSeries right({t.begin() + split, t.end()}, {v.begin() + split, v.end()});
        CHECK(quadrature(left) + quadrature(right) == doctest::Approx(quadrature(s)).epsilon(1e-14));
    }
}

TEST_CASE("property: derivative then quadrature recovers the endpoint difference") {
    for (double dt : {0.02, 0.01, 0.005}) {
        const TimeSeries s = sampled(0.0, 2.0, dt, [](double t) { return std::sin(3.0 * t) + t * t; });
        const double diff = s.back() - s.front();
        CHECK(std::abs(quadrature(numerical_derivative(s)) - diff) <= 20.0 * dt * dt);
    }
}

TEST_CASE("TimeSeries enforces its invariants") {
    CHECK_THROWS_AS(TimeSeries({0.0, 1.0}, {1.0}), InvalidInput);
    CHECK_THROWS_AS(TimeSeries({0.0, 0.0}, {1.0, 2.0}), InvalidInput);
    const TimeSeries s = sampled(0.0, 10.0, 0.01, [](double t) { return t; });
    const TimeSeries w = s.window(2.0, 4.0);
    CHECK(w.times().front() >= 2.0 - 1e-12);
    CHECK(w.times().back() <= 4.0 + 1e-12);
    CHECK(tail_mean(s) == doctest::Approx(9.75).epsilon(1e-3));
}
