#include <doctest.h>

#include <cmath>
#include <random>

#include "lyacert/certificates.hpp"
#include "lyacert/errors.hpp"

using namespace lyacert;

namespace {

SystemSpec coupled() {
    return {"coupled", 2, [](const State& x) -> State { return (State(2) << -x[0], -x[1] + x[0]).finished(); }};
}

// V1 = x1^2/2, N1 = x1^2, V2 = x2^2/2, N2 = x2^2/2, h(r) = r/2, scaled by `scale` on the first block.
LyapunovPair coupled_pair(double scale = 1.0) {
    auto p = LyapunovPair::composite([scale](const State& x) { return scale * 0.5 * x[0] * x[0]; },
                                     [scale](const State& x) { return scale * x[0] * x[0]; },
                                     [](const State& x) { return 0.5 * x[1] * x[1]; },
                                     [](const State& x) { return 0.5 * x[1] * x[1]; },
                                     [scale](double r) { return 0.5 * (r / scale) * scale; });
    p.V1_dot = [scale](const State& x) { return -scale * x[0] * x[0]; };
    p.V2_dot = [](const State& x) { return x[1] * (-x[1] + x[0]); };
    return p;
}

LyapunovPair decay_pair() {
    return LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                [](const State& x) { return x.squaredNorm(); },
                                ScalarField([](const State& x) { return -x.squaredNorm(); }));
}

IntegratorConfig horizon(double t_end) {
    IntegratorConfig c;
    c.t_end = t_end;
    return c;
}

SlopeBound declared(double L) {
    return declare_slope_bound([L](double r) { return L * r; }, L);
}

}  // namespace

TEST_CASE("global slope bound") {
    CHECK(slope_bound_global([](double r) { return 2.0 * r; }).value == doctest::Approx(2.0).epsilon(1e-12));
    // sup of 1/(1+r) over the default grid is attained at r = 1e-8
    const SlopeBound sat = slope_bound_global([](double r) { return r / (1.0 + r); });
    CHECK(sat.finite());
    CHECK(std::abs(sat.value - 1.0) <= 1e-7);
    CHECK_FALSE(slope_bound_global([](double r) { return std::sqrt(r); }).finite());
    CHECK_FALSE(slope_bound_global([](double r) { return r * r; }).finite());
    CHECK(slope_bound_global([](double) { return 0.0; }).value == 0.0);
    CHECK(slope_bound_global([](double r) { return r; }).sample_grid.size() == 400);
    CHECK_THROWS_AS(slope_bound_global([](double r) { return -r; }), HypothesisViolation);
    CHECK_THROWS_AS(slope_bound_global([](double r) { return r; }, {1.0, -1.0}), InvalidInput);
}

TEST_CASE("property: linear interaction gives its slope") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        const double c = u(rng);
        CHECK(std::abs(slope_bound_global([c](double r) { return c * r; }).value - c) <= 1e-9);
    }
}

TEST_CASE("local slope bound") {
    const SlopeBound a = slope_bound_local([](double r) { return r * r; }, 2.0);
    CHECK(a.kind == SlopeKind::bounded_range_L_R);
    CHECK(a.range_R.value() == 2.0);
    CHECK(a.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(slope_bound_local([](double r) { return r * r; }, 0.5).value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(slope_bound_local([](double) { return 0.0; }, 3.0).value == 0.0);
    CHECK_THROWS_AS(slope_bound_local([](double r) { return r; }, 0.0), InvalidInput);

    SUBCASE("range taken from the trajectory") {
        const Trajectory tr = integrate(coupled(), (State(2) << 2.0, 0.0).finished(), horizon(5.0));
        const SlopeBound b = slope_bound_local([](double r) { return r * r; }, tr, coupled_pair());
        CHECK(b.kind == SlopeKind::local_B_omega);
        CHECK(b.range_R.value() == doctest::Approx(4.0));
        CHECK(b.value == doctest::Approx(4.0).epsilon(1e-9));
    }
}

TEST_CASE("declared slope bounds are spot-checked") {
    CHECK(declare_slope_bound([](double r) { return 0.5 * r; }, 0.5).value == 0.5);
    CHECK_THROWS_AS(declare_slope_bound([](double r) { return 0.5 * r; }, 0.4), HypothesisViolation);
}

TEST_CASE("optimal delta") {
    auto c1 = optimal_delta(declared(1.0));
    CHECK(c1.delta == 0.5);
    CHECK(c1.gamma == 0.5);
    auto c0 = optimal_delta(declared(0.0));
    CHECK(c0.delta == 1.0);
    CHECK(c0.gamma == 1.0);
    auto c3 = optimal_delta(declared(3.0));
    CHECK(c3.delta == 0.25);
    CHECK(c3.gamma == 0.25);
    SlopeBound inf;
    inf.value = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(optimal_delta(inf), NoCertificate);
}

TEST_CASE("make_certificate") {
    const SlopeBound L2 = declared(2.0);
    CHECK(make_certificate(L2, 0.25).gamma == 0.25);
    CHECK(make_certificate(L2, 1.0 / 3.0).gamma == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(make_certificate(L2, 0.6), InvalidInput);
    CHECK_THROWS_AS(make_certificate(L2, 0.0), InvalidInput);
    try {
        make_certificate(L2, 0.9);
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("(0, 0.5)") != std::string::npos);
    }
    CHECK(make_certificate(declared(0.0), 3.0).delta == 3.0);
}

TEST_CASE("property: gamma formula and optimality of delta*") {
    for (double L : {0.0, 0.5, 1.0, 2.0, 3.0, 10.0, 0.137, 42.0}) {
        const SlopeBound s = declared(L);
        const auto best = optimal_delta(s);
        const double upper = L == 0.0 ? 1.0 : 1.0 / L;
        for (int k = 1; k <= 1000; ++k) {
            const double d = upper * k / 1001.0;
            const auto c = make_certificate(s, d);
            CHECK(c.gamma == std::min(1.0 - d * L, d));
            CHECK(best.gamma >= c.gamma - 1e-12);
        }
    }
}

TEST_CASE("pair construction checks h(0)") {
    CHECK_THROWS_AS(LyapunovPair::composite([](const State&) { return 0.0; }, [](const State&) { return 0.0; },
                                            [](const State&) { return 0.0; }, [](const State&) { return 0.0; },
                                            [](double r) { return r + 1.0; }),
                    HypothesisViolation);
}

TEST_CASE("strict decay on the coupled system") {
    const auto cert = optimal_delta(declared(0.5));
    CHECK(cert.delta == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    const Trajectory tr = integrate(coupled(), (State(2) << 1.0, 1.0).finished(), horizon(20.0));
    const DecayReport rep = verify_strict_decay(tr, coupled_pair(), cert);
    CHECK(rep.violation_times.empty());
    CHECK(rep.passed());
    CHECK(rep.analytic_wdot);
    CHECK(rep.tol == doctest::Approx(1e-6 * (1.0 + rep.W_series.front())));
    for (std::size_t k = 0; k < rep.residual_series.size(); ++k) {
        CHECK(rep.residual_series[k] ==
              doctest::Approx(rep.Wdot_series[k] + cert.gamma * (rep.N1_series[k] + rep.N2_series[k])).epsilon(1e-12));
        CHECK(rep.residual_series[k] <= rep.max_violation);
    }
    CHECK(integral_estimate(rep).satisfied);

    SUBCASE("delta near 1/L still certifies with a smaller gamma") {
        const auto near = make_certificate(declared(0.5), 0.99 * 2.0);
        CHECK(near.gamma == doctest::Approx(1.0 - 0.99).epsilon(1e-12));
        CHECK(verify_strict_decay(tr, coupled_pair(), near).violation_times.empty());
    }
}

TEST_CASE("equilibrium start has zero residual") {
    const Trajectory tr = integrate(coupled(), State::Zero(2), horizon(5.0));
    const DecayReport rep = verify_strict_decay(tr, coupled_pair(), optimal_delta(declared(0.5)));
    CHECK(rep.max_violation <= rep.tol);
    CHECK(rep.violation_times.empty());
    const IntegralReport ir = integral_estimate(rep);
    CHECK(ir.dissipation_integral == 0.0);
    CHECK(ir.budget == 0.0);
    CHECK(ir.satisfied);
    const VanishingReport vr = observable_vanishing(rep, 1e-8);
    CHECK(vr.terminal_N1 == 0.0);
    CHECK(vr.vanished);
}

TEST_CASE("unstable system is never certified") {
    const SystemSpec grow{"grow", 1, [](const State& x) -> State { return x; }};
    const LyapunovPair pair = LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                                   [](const State& x) { return x.squaredNorm(); },
                                                   ScalarField([](const State& x) { return x.squaredNorm(); }));
    const Trajectory tr = integrate(grow, (State(1) << 0.1).finished(), horizon(5.0));
    const DecayReport rep = verify_strict_decay(tr, pair, optimal_delta(declared(0.0)));
    CHECK_FALSE(rep.passed());
    CHECK(rep.violation_times.size() == tr.size() - 4);
}

TEST_CASE("numerical Wdot is used without an analytic derivative") {
    const SystemSpec decay{"decay", 1, [](const State& x) -> State { return -x; }};
    const LyapunovPair pair = LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                                   [](const State& x) { return x.squaredNorm(); });
    const Trajectory tr = integrate(decay, (State(1) << 1.0).finished(), horizon(10.0));
    const DecayReport rep = verify_strict_decay(tr, pair, optimal_delta(declared(0.0)), 1e-5);
    CHECK_FALSE(rep.analytic_wdot);
    CHECK_FALSE(rep.wdot_crosscheck_discrepancy.has_value());
    CHECK(rep.violation_times.empty());
}

TEST_CASE("analytic Wdot is cross-checked") {
    const SystemSpec decay{"decay", 1, [](const State& x) -> State { return -x; }};
    const Trajectory tr = integrate(decay, (State(1) << 1.0).finished(), horizon(10.0));
    const DecayReport good = verify_strict_decay(tr, decay_pair(), optimal_delta(declared(0.0)));
    REQUIRE(good.wdot_crosscheck_discrepancy.has_value());
    CHECK(good.crosscheck_pass());
    // A wrong closed form is caught even though it would certify decay.
    const LyapunovPair wrong = LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                                    [](const State& x) { return x.squaredNorm(); },
                                                    ScalarField([](const State& x) { return -3.0 * x.squaredNorm(); }));
    const DecayReport bad = verify_strict_decay(tr, wrong, optimal_delta(declared(0.0)));
    CHECK(bad.violation_times.empty());
    CHECK_FALSE(bad.crosscheck_pass());
    CHECK_FALSE(bad.passed());
}

TEST_CASE("negative observables are hypothesis violations") {
    const SystemSpec decay{"decay", 1, [](const State& x) -> State { return -x; }};
    const LyapunovPair pair = LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                                   [](const State& x) { return -x.squaredNorm(); });
    const Trajectory tr = integrate(decay, (State(1) << 1.0).finished(), horizon(1.0));
    CHECK_THROWS_AS(verify_strict_decay(tr, pair, optimal_delta(declared(0.0))), HypothesisViolation);
}

TEST_CASE("vanishing observables") {
    const SystemSpec decay{"decay", 1, [](const State& x) -> State { return -x; }};
    const Trajectory tr = integrate(decay, (State(1) << 1.0).finished(), horizon(20.0));
    const DecayReport rep = verify_strict_decay(tr, decay_pair(), optimal_delta(declared(0.0)));
    const VanishingReport vr = observable_vanishing(rep, 1e-8);
    CHECK(vr.terminal_N1 <= 1e-8);
    CHECK(vr.vanished);
    CHECK(vr.uc_surrogate_bound >= 0.0);

    SUBCASE("blow-up is never reported as vanished") {
        const SystemSpec sq{"square", 1, [](const State& x) -> State { return x.cwiseProduct(x); }};
        const Trajectory blow = integrate(sq, (State(1) << 1.0).finished(), horizon(2.0));
        const LyapunovPair pair = LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                                       [](const State& x) { return x.squaredNorm(); });
        const VanishingReport b = observable_vanishing(verify_strict_decay(blow, pair, optimal_delta(declared(0.0))), 1e-8);
        CHECK(b.truncated);
        CHECK_FALSE(b.vanished);
    }
    SUBCASE("short tail window is rejected") {
        IntegratorConfig c = horizon(1.0);
        c.dense_output_dt = 0.1;
        const Trajectory shortrun = integrate(decay, (State(1) << 1.0).finished(), c);
        const DecayReport r = verify_strict_decay(shortrun, decay_pair(), optimal_delta(declared(0.0)));
        CHECK_THROWS_AS(observable_vanishing(r, 1e-8), InvalidInput);
    }
}

TEST_CASE("property: random initial states on the coupled system") {
    std::mt19937_64 rng(0xC0FFEE);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto cert = optimal_delta(declared(0.5));
    for (int trial = 0; trial < 12; ++trial) {
        State x0(2);
        x0 << g(rng), g(rng);
        x0 *= 2.0 * u(rng) / x0.norm();
        const Trajectory tr = integrate(coupled(), x0, horizon(15.0));
        const DecayReport rep = verify_strict_decay(tr, coupled_pair(), cert);
        CHECK(rep.violation_times.empty());
        // W nonincreasing up to tol on the grid
        for (std::size_t k = 1; k < rep.W_series.size(); ++k) CHECK(rep.W_series[k] <= rep.W_series[k - 1] + rep.tol);
        const IntegralReport ir = integral_estimate(rep);
        CHECK(ir.dissipation_integral <= ir.budget * (1.0 + 1e-6) + 1e-9);
    }
}

TEST_CASE("property: rescaling the first block leaves the violation set unchanged") {
    // For c < 1 the rescaled interaction c h(N1) no longer bounds V2', so the
    // hypotheses themselves change; only c >= 1 keeps the bundle valid.
    const Trajectory tr = integrate(coupled(), (State(2) << 0.7, -0.4).finished(), horizon(10.0));
    for (double c : {1.0, 2.0, 25.0}) {
        const auto base = verify_strict_decay(tr, coupled_pair(), optimal_delta(declared(0.5)), 1e-6);
        const auto scaled = verify_strict_decay(tr, coupled_pair(c), optimal_delta(declared(0.5)), 1e-6);
        CHECK(base.violation_times == scaled.violation_times);
    }
}
