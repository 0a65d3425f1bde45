#include "lyacert/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lyacert {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
    if (!v) return nullptr;
    if constexpr (std::is_floating_point_v<T>)
        return number(*v);
    else
        return json(*v);
}

json vec(const State& x) {
    json a = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(number(x[i]));
    return a;
}

json vec(const std::vector<double>& x) {
    json a = json::array();
    for (double v : x) a.push_back(number(v));
    return a;
}

std::string slope_kind(SlopeKind k) {
    switch (k) {
        case SlopeKind::global_L: return "global";
        case SlopeKind::local_B_omega: return "local";
        case SlopeKind::bounded_range_L_R: return "bounded_range";
    }
    return "unknown";
}

json constants_json(const PrimalDualConstants& c) {
    return {{"A_norm", number(c.A_norm)}, {"C_x", number(c.C_x)},
            {"kappa", number(c.kappa)},   {"c0", number(c.c0)},
            {"a1", number(c.a1)},         {"a2", number(c.a2)},
            {"c1_estimate", number(c.c1)}, {"c2_estimate", number(c.c2)},
            {"samples", c.samples},       {"nonpositive_W_samples", c.nonpositive_W_samples}};
}

}  // namespace

std::string to_string(PerturbedOutcome o) {
    switch (o) {
        case PerturbedOutcome::certified: return "certified";
        case PerturbedOutcome::needs_smaller_epsilon: return "needs_smaller_epsilon";
        case PerturbedOutcome::no_certificate: return "no_certificate";
    }
    return "unknown";
}

bool TrajectoryResult::pass() const {
    for (const auto& [name, ok] : checks)
        if (!ok) return false;
    return true;
}

json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

json to_json(const DecayReport& r) {
    json j;
    j["certificate"] = {{"delta", number(r.certificate.delta)},
                        {"gamma", number(r.certificate.gamma)},
                        {"slope_bound", number(r.certificate.slope.value)},
                        {"slope_kind", slope_kind(r.certificate.slope.kind)},
                        {"slope_range_R", opt(r.certificate.slope.range_R)}};
    j["W_initial"] = r.W_series.empty() ? json(nullptr) : number(r.W_series.front());
    j["W_final"] = r.W_series.empty() ? json(nullptr) : number(r.W_series.back());
    j["max_violation"] = number(r.max_violation);
    j["violation_count"] = r.violation_times.size();
    j["violation_times"] = vec(r.violation_times);
    j["tol"] = number(r.tol);
    j["analytic_wdot"] = r.analytic_wdot;
    j["wdot_crosscheck_discrepancy"] = opt(r.wdot_crosscheck_discrepancy);
    j["wdot_crosscheck_tol"] = number(r.wdot_crosscheck_tol);
    j["truncated"] = r.truncated;
    j["pass"] = r.passed();
    return j;
}

json to_json(const IntegralReport& r) {
    return {{"dissipation_integral", number(r.dissipation_integral)},
            {"budget", number(r.budget)},
            {"W_limit_estimate", number(r.W_limit_estimate)},
            {"pass", r.satisfied}};
}

json to_json(const VanishingReport& r) {
    json raw = json::object();
    for (const auto& [k, v] : r.terminal_raw) raw[k] = number(v);
    return {{"terminal_N1", number(r.terminal_N1)},
            {"terminal_N2", number(r.terminal_N2)},
            {"terminal_raw", raw},
            {"uc_surrogate_bound", number(r.uc_surrogate_bound)},
            {"threshold", number(r.threshold)},
            {"truncated", r.truncated},
            {"pass", r.vanished}};
}

json to_json(const ConvergenceCheck& r) {
    return {{"terminal_mean", number(r.terminal_mean)},
            {"terminal_max", number(r.terminal_max)},
            {"threshold", number(r.threshold)},
            {"pass", r.pass}};
}

json to_json(const L2Report& r) {
    return {{"integral_dist_sq", number(r.integral_dist_sq)},
            {"budget", number(r.budget)},
            {"W_infinity", number(r.W_infinity)},
            {"bound_pass", r.bound_pass},
            {"worst_error_bound_ratio", number(r.worst_ratio)},
            {"worst_error_bound_ratio_N1", opt(r.worst_ratio_N1)},
            {"worst_error_bound_ratio_N2", opt(r.worst_ratio_N2)},
            {"error_bound_pass", r.error_bound_pass},
            {"samples_in_neighborhood", r.samples_in_neighborhood},
            {"pass", r.pass()}};
}

json to_json(const RateReport& r) {
    json windows = json::array();
    for (const auto& w : r.window_checks)
        windows.push_back({{"T", number(w.T)}, {"min_dist", number(w.min_dist)}, {"bound", number(w.bound)}, {"pass", w.pass}});
    return {{"K", number(r.K)},
            {"windows", windows},
            {"windows_pass", r.windows_pass()},
            {"C_fit", opt(r.C_fit)},
            {"exponent_fit", opt(r.exponent_fit)},
            {"fit_samples", r.fit_samples},
            {"monotone_tail", r.monotone_tail},
            {"envelope_holds", r.envelope_holds},
            {"pointwise_pass", r.pointwise_pass},
            {"tail_start_time", number(r.tail_start_time)},
            {"t_entry", opt(r.t_entry)},
            {"t_monotone", opt(r.t_monotone)},
            {"notes", r.notes}};
}

json to_json(const ExponentialReport& r) {
    return {{"applicable", r.applicable},
            {"t0", number(r.t0)},
            {"W_t0", number(r.W_t0)},
            {"rate", number(r.rate)},
            {"envelope_pass", r.envelope_pass},
            {"worst_envelope_ratio", number(r.worst_envelope_ratio)},
            {"samples_compared", r.samples_compared},
            {"growth_pass", r.growth_pass},
            {"worst_growth_margin", number(r.worst_growth_margin)},
            {"fitted_W_decay_rate", opt(r.fitted_W_decay_rate)},
            {"note", r.note},
            {"pass", r.pass()}};
}

json to_json(const PerturbedReport& r) {
    json j = {{"family", r.family},
              {"epsilon", number(r.epsilon)},
              {"exclusion_radius", number(r.exclusion_radius)},
              {"points_checked", r.points_checked},
              {"nonnegative_points", r.nonnegative_points},
              {"max_W_eps_dot", number(r.max_W_eps_dot)},
              {"worst_bound_gap", opt(r.worst_bound_gap)},
              {"c_eps", opt(r.c_eps)},
              {"outcome", r.outcome ? json(to_string(*r.outcome)) : json(nullptr)},
              {"max_admissible_epsilon", opt(r.max_admissible_epsilon)},
              {"note", r.note},
              {"pass", r.pass}};
    j["constants_estimated"] = r.constants ? constants_json(*r.constants) : json(nullptr);
    return j;
}

json to_json(const StabilityVerdict& v) {
    json stab = json::array();
    for (const auto& row : v.lyapunov_stability_table)
        stab.push_back({{"equilibrium_index", row.equilibrium_index},
                        {"equilibrium", vec(row.equilibrium)},
                        {"r_probe", number(row.r_probe)},
                        {"direction_index", row.direction_index},
                        {"max_excursion", number(row.max_excursion)},
                        {"ratio", number(row.ratio)},
                        {"stable", row.stable}});
    json conv = json::array();
    for (const auto& row : v.convergence_table)
        conv.push_back({{"equilibrium_index", row.equilibrium_index},
                        {"r_probe", number(row.r_probe)},
                        {"direction_index", row.direction_index},
                        {"terminal_dist", number(row.terminal_dist)},
                        {"limit_drift", number(row.limit_drift)},
                        {"truncated", row.truncated},
                        {"converged", row.converged}});
    return {{"verdict", to_string(v.verdict)},
            {"stability_probe_pass", v.stability_probe_pass},
            {"convergence_probe_pass", v.convergence_probe_pass},
            {"seed", v.seed},
            {"empirical", v.empirical},
            {"lyapunov_stability_table", stab},
            {"convergence_table", conv},
            {"pass", v.verdict != Verdict::inconclusive}};
}

json to_json(const TrajectoryResult& r) {
    json j;
    j["index"] = r.index;
    j["x0"] = vec(r.x0);
    j["system"] = r.trajectory.system_name;
    j["samples"] = r.trajectory.size();
    j["horizon"] = number(r.trajectory.horizon());
    j["truncated"] = r.trajectory.truncated;
    j["final_state"] = r.trajectory.states.empty() ? json(nullptr) : vec(r.trajectory.states.back());
    if (r.decay) j["decay"] = to_json(*r.decay);
    if (r.integral) j["integral"] = to_json(*r.integral);
    if (r.vanishing) j["vanishing"] = to_json(*r.vanishing);
    if (r.dist && !r.dist->empty()) j["terminal_dist"] = number(r.dist->back());
    if (r.convergence) j["distance"] = to_json(*r.convergence);
    if (r.l2) j["l2"] = to_json(*r.l2);
    if (r.rates) j["rates"] = to_json(*r.rates);
    if (r.exponential) j["exponential"] = to_json(*r.exponential);
    if (r.perturbed) j["perturbed"] = to_json(*r.perturbed);
    j["checks"] = r.checks;
    j["pass"] = r.pass();
    return j;
}

json to_json(const RunReport& r) {
    json j;
    j["scenario_name"] = r.scenario_name;
    j["scenario"] = r.scenario_echo;
    json trajs = json::array();
    for (const auto& t : r.trajectories) trajs.push_back(to_json(t));
    j["trajectories"] = trajs;
    j["stability"] = r.stability ? to_json(*r.stability) : json(nullptr);
    j["overall_pass"] = r.overall_pass;
    j["tool_version"] = r.tool_version;
    j["wall_time"] = number(r.wall_time);
    return j;
}

json yaml_to_json(const YAML::Node& node) {
    switch (node.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined: return nullptr;
        case YAML::NodeType::Sequence: {
            json a = json::array();
            for (const auto& item : node) a.push_back(yaml_to_json(item));
            return a;
        }
        case YAML::NodeType::Map: {
            json o = json::object();
            for (const auto& kv : node) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
        case YAML::NodeType::Scalar: break;
    }
    const std::string text = node.Scalar();
    if (node.Tag() == "!") return text;  // quoted
    if (text == "true" || text == "false") return text == "true";
    long long i = 0;
    if (YAML::convert<long long>::decode(node, i)) return i;
    double d = 0.0;
    if (YAML::convert<double>::decode(node, d)) return number(d);
    return text;
}

std::string format_float(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t";
    for (int i = 0; i < traj.dimension(); ++i) os << ",x" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_float(traj.times[k]);
        for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) os << ',' << format_float(traj.states[k][i]);
        os << '\n';
    }
    return os.str();
}

std::string decay_csv(const DecayReport& d, const std::optional<TimeSeries>& dist) {
    std::ostringstream os;
    os << "t,W,Wdot,N1,N2,residual,dist\n";
    for (std::size_t k = 0; k < d.W_series.size(); ++k) {
        os << format_float(d.W_series.time(k)) << ',' << format_float(d.W_series[k]) << ','
           << format_float(d.Wdot_series[k]) << ',' << format_float(d.N1_series[k]) << ','
           << format_float(d.N2_series[k]) << ',' << format_float(d.residual_series[k]) << ',';
        if (dist && k < dist->size()) os << format_float((*dist)[k]);
        os << '\n';
    }
    return os.str();
}

std::string windows_csv(const RateReport& rates) {
    std::ostringstream os;
    os << "T,min_dist,bound,pass\n";
    for (const auto& w : rates.window_checks)
        os << format_float(w.T) << ',' << format_float(w.min_dist) << ',' << format_float(w.bound) << ','
           << (w.pass ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace lyacert
