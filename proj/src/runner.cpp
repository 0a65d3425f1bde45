#include "lyacert/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lyacert/parallel.hpp"

namespace lyacert {

namespace {

// Certificate construction failures are configuration errors, not runtime ones.
struct ConfigurationFailure : InvalidInput {
    using InvalidInput::InvalidInput;
};

CompositeCertificate build_certificate(const Scenario& s, const Trajectory& traj) {
    try {
        const SlopeBound slope = s.slope_mode == SlopeMode::local ? slope_bound_local(s.bundle.pair.h, traj, s.bundle.pair)
                                                                  : scenario_slope_bound(s);
        return s.explicit_delta ? make_certificate(slope, *s.explicit_delta) : optimal_delta(slope);
    } catch (const InvalidInput& e) {
        throw ConfigurationFailure(std::string("delta_policy: ") + e.what());
    } catch (const NoCertificate& e) {
        throw ConfigurationFailure(std::string("slope_bound: ") + e.what());
    }
}

PerturbedReport din_perturbed(const Scenario& s, const TrajectoryResult& r) {
    const ObjectiveSpec& obj = *s.bundle.objective;
    DINParams p = *s.bundle.din;
    if (!p.anchor_z) p.anchor_z = din_default_anchor(obj, r.x0);
    const DINPerturbedEnergy pe = din_perturbed_energy(obj, p);

    PerturbedReport rep;
    rep.family = "din";
    rep.epsilon = p.epsilon;
    rep.c_eps = pe.c_eps;
    const TimeSeries wdot = evaluate_along(r.trajectory, pe.W_eps_dot);
    const TimeSeries bound = evaluate_along(r.trajectory, pe.decay_bound);
    double gap = -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (std::size_t k = 0; k < wdot.size(); ++k) {
        gap = std::max(gap, wdot[k] - bound[k]);
        scale = std::max(scale, std::abs(wdot[k]));
        if ((*r.dist)[k] <= rep.exclusion_radius) continue;
        ++rep.points_checked;
        rep.max_W_eps_dot = std::max(rep.max_W_eps_dot, wdot[k]);
        if (wdot[k] >= 0.0) ++rep.nonnegative_points;
    }
    rep.worst_bound_gap = gap;
    rep.pass = rep.nonnegative_points == 0 && gap <= 1e-9 * (1.0 + scale);
    return rep;
}

PerturbedReport pd_perturbed(const Scenario& s, const TrajectoryResult& r) {
    const ObjectiveSpec& obj = *s.bundle.objective;
    const PrimalDualParams& p = *s.bundle.pd;
    SublevelSampling sampling = sampling_from_trajectory(obj, p, r.trajectory);
    sampling.seed = s.seed;
    const PDPerturbedEnergy pe = pd_perturbed_energy(obj, p, sampling);

    PerturbedReport rep;
    rep.family = "pd";
    rep.epsilon = p.epsilon;
    rep.constants = pe.constants;
    rep.outcome = pe.outcome;
    rep.max_admissible_epsilon = pe.max_admissible_epsilon;
    rep.note = pe.note;
    // No closed-form derivative exists for the perturbed energy; differentiate numerically.
    const TimeSeries wdot = numerical_derivative(evaluate_along(r.trajectory, pe.W_eps));
    for (std::size_t k = 0; k < wdot.size(); ++k) {
        if ((*r.dist)[k] <= rep.exclusion_radius) continue;
        ++rep.points_checked;
        rep.max_W_eps_dot = std::max(rep.max_W_eps_dot, wdot[k]);
        if (wdot[k] >= 0.0) ++rep.nonnegative_points;
    }
    rep.pass = pe.outcome == PerturbedOutcome::certified && rep.nonnegative_points == 0;
    return rep;
}

TrajectoryResult run_one(const Scenario& s, std::size_t index) {
    const auto has = [&](Check c) { return s.checks.count(c) > 0; };
    TrajectoryResult r;
    r.index = index;
    r.x0 = s.x0[index];
    r.trajectory = integrate(s.bundle.system, r.x0, s.integrator);

    const CompositeCertificate cert = build_certificate(s, r.trajectory);
    r.decay = verify_strict_decay(r.trajectory, s.bundle.pair, cert, s.decay_tol);
    if (has(Check::decay)) r.checks["decay"] = r.decay->passed();
    if (has(Check::integral)) {
        r.integral = integral_estimate(*r.decay);
        r.checks["integral"] = r.integral->satisfied;
    }
    if (has(Check::vanishing)) {
        r.vanishing = observable_vanishing(*r.decay, s.vanishing_threshold);
        r.checks["vanishing"] = r.vanishing->vanished;
    }
    if (s.bundle.critical_set) r.dist = distance_series(r.trajectory, *s.bundle.critical_set);
    if (has(Check::distance)) {
        r.convergence = check_convergence_to_E(*r.dist, s.distance_threshold);
        r.checks["distance"] = r.convergence->pass;
    }
    if (has(Check::l2)) {
        r.l2 = l2_distance_bound(*r.dist, *r.decay, *s.error_bound);
        r.checks["l2"] = r.l2->pass();
    }
    if (has(Check::subsequence) || has(Check::pointwise)) {
        double K = 0.0;
        if (s.error_bound) K = rate_constant_K(r.decay->W_series, cert.gamma, s.error_bound->c);
        const ErrorBoundParams eb = s.error_bound.value_or(ErrorBoundParams{});
        r.rates = rate_report(*r.dist, K, eb, s.window_grid, s.tail_start);
        if (has(Check::subsequence)) r.checks["subsequence"] = r.rates->windows_pass();
        if (has(Check::pointwise)) r.checks["pointwise"] = r.rates->pointwise_pass;
    }
    if (has(Check::exponential)) {
        r.exponential = exponential_rate(*r.dist, r.decay->W_series, *s.quadratic_growth, cert.gamma, s.error_bound->c);
        r.checks["exponential"] = r.exponential->pass();
    }
    if (has(Check::perturbed)) {
        if (!r.dist) r.dist = distance_series(r.trajectory, *s.bundle.critical_set);
        r.perturbed = s.bundle.din ? din_perturbed(s, r) : pd_perturbed(s, r);
        r.checks["perturbed"] = r.perturbed->pass;
    }
    return r;
}

std::string prefix_error(std::size_t index, const std::exception& e) {
    return "x0[" + std::to_string(index) + "]: " + e.what();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::size_t threads_from_env() {
    const char* v = std::getenv("LYACERT_THREADS");
    if (!v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || n < 1) return 1;
    return static_cast<std::size_t>(n);
}

void apply_overrides(Scenario& s, const RunOverrides& o) {
    if (o.output_dir) s.output_dir = *o.output_dir;
    if (o.seed) {
        s.seed = *o.seed;
        s.probe.seed = *o.seed;
    }
    if (o.dense_dt) {
        s.integrator.dense_output_dt = *o.dense_dt;
        try {
            s.integrator.validate();
        } catch (const InvalidInput& e) {
            throw InvalidInput(std::string("--dense-dt: ") + e.what());
        }
    }
}

RunReport run_pipeline(const Scenario& s, std::size_t threads) {
    RunReport report;
    report.scenario_name = s.name;
    report.scenario_echo = yaml_to_json(s.source);
    report.scenario_echo["effective"] = {
        {"seed", s.seed},
        {"dense_output_dt", number(s.integrator.dense_dt())},
        {"checks", [&] {
             std::vector<std::string> names;
             for (Check c : s.checks) names.push_back(to_string(c));
             return names;
         }()}};

    std::vector<std::optional<TrajectoryResult>> slots(s.x0.size());
    parallel_for(s.x0.size(), threads, [&](std::size_t k) {
        try {
            slots[k] = run_one(s, k);
        } catch (const ConfigurationFailure& e) {
            throw ConfigurationFailure(prefix_error(k, e));
        } catch (const EvaluationError& e) {
            throw EvaluationError(prefix_error(k, e));
        } catch (const HypothesisViolation& e) {
            throw HypothesisViolation(prefix_error(k, e));
        } catch (const Error& e) {
            throw Error(prefix_error(k, e));
        }
    });
    for (auto& slot : slots) report.trajectories.push_back(std::move(*slot));

    bool pass = true;
    for (const auto& t : report.trajectories) pass = pass && t.pass();
    if (s.checks.count(Check::classify)) {
        ProbeConfig probe = s.probe;
        probe.threads = threads;
        report.stability = classify_stability(s.bundle.system, *s.bundle.critical_set, probe, s.integrator,
                                              s.bundle.critical_set_is_equilibrium_set);
        pass = pass && report.stability->verdict != Verdict::inconclusive;
    }
    report.overall_pass = pass;
    return report;
}

void write_outputs(const RunReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("output_dir: cannot create '" + dir + "': " + ec.message());
    const fs::path root(dir);
    write_file(root / "report.json", to_json(report).dump(2) + "\n");
    for (const auto& t : report.trajectories) {
        const std::string k = std::to_string(t.index);
        write_file(root / ("trajectory_" + k + ".csv"), trajectory_csv(t.trajectory));
        if (t.decay) write_file(root / ("decay_" + k + ".csv"), decay_csv(*t.decay, t.dist));
        if (t.rates) write_file(root / ("windows_" + k + ".csv"), windows_csv(*t.rates));
    }
}

RunOutcome run_scenario(const std::string& path, const RunOverrides& overrides) {
    RunOutcome out;
    const auto start = std::chrono::steady_clock::now();
    ScenarioParse parsed;
    try {
        parsed = parse_scenario_file(path);
    } catch (const Error& e) {
        out.exit_code = kExitInvalid;
        out.messages.push_back(e.what());
        return out;
    }
    if (!parsed.ok()) {
        out.exit_code = kExitInvalid;
        for (const auto& d : parsed.diagnostics) out.messages.push_back(format(d));
        return out;
    }
    Scenario s = std::move(*parsed.scenario);
    try {
        apply_overrides(s, overrides);
    } catch (const Error& e) {
        out.exit_code = kExitInvalid;
        out.messages.push_back(e.what());
        return out;
    }
    out.output_dir = s.output_dir;
    try {
        RunReport report = run_pipeline(s, overrides.threads.value_or(threads_from_env()));
        report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_outputs(report, s.output_dir);
        out.exit_code = report.overall_pass ? kExitPass : kExitCheckFailed;
        for (const auto& t : report.trajectories)
            for (const auto& [name, ok] : t.checks)
                if (!ok) out.messages.push_back("x0[" + std::to_string(t.index) + "]: check '" + name + "' failed");
        if (report.stability && report.stability->verdict == Verdict::inconclusive)
            out.messages.push_back("classify: verdict inconclusive");
        out.report = std::move(report);
    } catch (const ConfigurationFailure& e) {
        out.exit_code = kExitInvalid;
        out.messages.push_back(e.what());
    } catch (const std::exception& e) {
        out.exit_code = kExitRuntime;
        out.messages.push_back(e.what());
    }
    return out;
}

}  // namespace lyacert
