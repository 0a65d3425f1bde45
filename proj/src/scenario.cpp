#include "lyacert/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lyacert {

namespace {

const std::vector<std::pair<Check, std::string>>& check_names() {
    static const std::vector<std::pair<Check, std::string>> names = {
        {Check::decay, "decay"},         {Check::integral, "integral"},
        {Check::vanishing, "vanishing"}, {Check::distance, "distance"},
        {Check::l2, "l2"},               {Check::subsequence, "subsequence"},
        {Check::pointwise, "pointwise"}, {Check::exponential, "exponential"},
        {Check::classify, "classify"},   {Check::perturbed, "perturbed"},
    };
    return names;
}

// Collects diagnostics while reading typed values out of YAML.
class Reader {
public:
    std::vector<Diagnostic> diags;

    void error(std::string field, std::string message) { diags.push_back({std::move(field), std::move(message)}); }

    std::optional<double> number(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        try {
            const double v = n.as<double>();
            if (!std::isfinite(v)) {
                error(field, "must be finite");
                return std::nullopt;
            }
            return v;
        } catch (const YAML::Exception&) {
            error(field, "expected a number");
            return std::nullopt;
        }
    }

    std::optional<long> integer(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        try {
            return n.as<long>();
        } catch (const YAML::Exception&) {
            error(field, "expected an integer");
            return std::nullopt;
        }
    }

    std::optional<std::uint64_t> unsigned64(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        try {
            return n.as<std::uint64_t>();
        } catch (const YAML::Exception&) {
            error(field, "expected a nonnegative integer");
            return std::nullopt;
        }
    }

    std::optional<std::string> text(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        if (!n.IsScalar()) {
            error(field, "expected a string");
            return std::nullopt;
        }
        return n.as<std::string>();
    }

    std::optional<bool> boolean(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        try {
            return n.as<bool>();
        } catch (const YAML::Exception&) {
            error(field, "expected true or false");
            return std::nullopt;
        }
    }

    std::optional<State> vector(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        if (!n.IsSequence()) {
            error(field, "expected a list of numbers");
            return std::nullopt;
        }
        State v(static_cast<Eigen::Index>(n.size()));
        for (std::size_t i = 0; i < n.size(); ++i) {
            const auto x = number(n[i], field + "[" + std::to_string(i) + "]");
            if (!x) return std::nullopt;
            v[static_cast<Eigen::Index>(i)] = *x;
        }
        return v;
    }

    std::optional<Eigen::MatrixXd> matrix(const YAML::Node& n, const std::string& field) {
        if (!n) return std::nullopt;
        if (!n.IsSequence() || n.size() == 0) {
            error(field, "expected a nonempty list of rows");
            return std::nullopt;
        }
        std::vector<State> rows;
        for (std::size_t i = 0; i < n.size(); ++i) {
            auto r = vector(n[i], field + "[" + std::to_string(i) + "]");
            if (!r) return std::nullopt;
            rows.push_back(std::move(*r));
        }
        const auto cols = rows.front().size();
        Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols) {
                error(field, "rows have different lengths");
                return std::nullopt;
            }
            M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        }
        return M;
    }
};

SystemBundle scalar_linear(const std::string& id, double rate) {
    SystemBundle b;
    b.id = id;
    b.system.name = id;
    b.system.dimension = 1;
    b.system.field = [rate](const State& x) -> State { return rate * x; };
    b.pair = LyapunovPair::single([](const State& x) { return 0.5 * x.squaredNorm(); },
                                  [](const State& x) { return x.squaredNorm(); },
                                  ScalarField([rate](const State& x) { return rate * x.squaredNorm(); }));
    b.critical_set = CriticalSetSpec::point(State::Zero(1));
    b.critical_set_is_equilibrium_set = true;
    b.known_slope = 0.0;
    return b;
}

SystemBundle coupled_synthetic() {
    SystemBundle b;
    b.id = "coupled:synthetic";
    b.system.name = b.id;
    b.system.dimension = 2;
    b.system.field = [](const State& x) -> State { return (State(2) << -x[0], -x[1] + x[0]).finished(); };
    b.pair = LyapunovPair::composite([](const State& x) { return 0.5 * x[0] * x[0]; },
                                     [](const State& x) { return x[0] * x[0]; },
                                     [](const State& x) { return 0.5 * x[1] * x[1]; },
                                     [](const State& x) { return 0.5 * x[1] * x[1]; },
                                     [](double r) { return 0.5 * r; });
    b.pair.V1_dot = [](const State& x) { return -x[0] * x[0]; };
    b.pair.V2_dot = [](const State& x) { return x[1] * (-x[1] + x[0]); };
    b.critical_set = CriticalSetSpec::point(State::Zero(2));
    b.critical_set_is_equilibrium_set = true;
    b.known_slope = 0.5;
    return b;
}

}  // namespace

std::string to_string(Check c) {
    for (const auto& [k, name] : check_names())
        if (k == c) return name;
    return "unknown";
}

std::optional<Check> parse_check(const std::string& name) {
    for (const auto& [k, n] : check_names())
        if (n == name) return k;
    return std::nullopt;
}

const std::vector<Check>& all_checks() {
    static const std::vector<Check> all = [] {
        std::vector<Check> v;
        for (const auto& [k, n] : check_names()) v.push_back(k);
        return v;
    }();
    return all;
}

std::string format(const Diagnostic& d) { return d.field + ": " + d.message; }

std::vector<std::string> builtin_system_ids() {
    std::vector<std::string> ids;
    for (const auto& [name, obj] : builtin_objectives()) ids.push_back("din:" + name);
    ids.push_back("pd:quad_iso_eqcon");
    ids.push_back("linear:stable_scalar");
    ids.push_back("linear:unstable_scalar");
    ids.push_back("coupled:synthetic");
    return ids;
}

SystemBundle builtin_bundle(const std::string& id, const DINParams& din) {
    if (id.rfind("din:", 0) == 0) {
        const ObjectiveSpec obj = builtin_objective(id.substr(4));
        SystemBundle b;
        b.id = id;
        b.system = din_system(obj, din);
        b.pair = din_energy(obj, din);
        b.critical_set = din_critical_set(obj);
        b.critical_set_is_equilibrium_set = true;
        b.known_slope = 0.0;
        b.objective = obj;
        b.din = din;
        return b;
    }
    if (id.rfind("pd:", 0) == 0) {
        PrimalDualInstance inst = builtin_pd_instance(id.substr(3));
        SystemBundle b;
        b.id = id;
        b.system = pd_system(inst.objective, inst.params);
        b.pair = pd_energy(inst.objective, inst.params);
        b.critical_set = pd_critical_set(inst.params);
        b.critical_set_is_equilibrium_set = true;
        b.known_slope = 0.0;
        b.objective = inst.objective;
        b.pd = inst.params;
        return b;
    }
    if (id == "linear:stable_scalar") return scalar_linear(id, -1.0);
    if (id == "linear:unstable_scalar") return scalar_linear(id, 1.0);
    if (id == "coupled:synthetic") return coupled_synthetic();
    throw InvalidInput("unknown built-in system '" + id + "'");
}

SlopeBound scenario_slope_bound(const Scenario& s) {
    const auto& h = s.bundle.pair.h;
    if (s.slope_mode == SlopeMode::declared) return declare_slope_bound(h, *s.declared_slope);
    if (s.bundle.known_slope) return declare_slope_bound(h, *s.bundle.known_slope);
    return slope_bound_global(h);
}

ScenarioParse parse_scenario(const YAML::Node& doc) {
    ScenarioParse out;
    Reader rd;
    if (!doc || !doc.IsMap()) {
        out.diagnostics.push_back({"<document>", "scenario must be a mapping of fields"});
        return out;
    }
    static const std::set<std::string> known = {
        "name",        "system",      "system_params", "x0",           "integrator", "pair",
        "delta_policy", "slope_bound", "critical_set", "equilibrium_set", "checks",   "thresholds",
        "error_bound", "quadratic_growth", "probe",     "rates",        "output_dir", "seed"};
    for (const auto& kv : doc) {
        const auto key = kv.first.as<std::string>();
        if (!known.count(key)) rd.error(key, "unknown field");
    }

    Scenario s;
    s.source = YAML::Clone(doc);
    s.name = rd.text(doc["name"], "name").value_or("scenario");
    if (auto dir = rd.text(doc["output_dir"], "output_dir")) s.output_dir = *dir;
    if (auto seed = rd.unsigned64(doc["seed"], "seed")) s.seed = *seed;
    s.probe.seed = s.seed;

    // --- system parameters
    DINParams din;
    const YAML::Node sp = doc["system_params"];
    double pd_eps = 0.0;
    std::optional<State> etas;
    if (sp) {
        if (!sp.IsMap()) {
            rd.error("system_params", "expected a mapping");
        } else {
            if (auto v = rd.number(sp["alpha"], "system_params.alpha")) din.alpha = *v;
            if (auto v = rd.number(sp["beta"], "system_params.beta")) din.beta = *v;
            if (auto v = rd.number(sp["epsilon"], "system_params.epsilon")) din.epsilon = pd_eps = *v;
            din.anchor_z = rd.vector(sp["anchor_z"], "system_params.anchor_z");
            etas = rd.vector(sp["eta"], "system_params.eta");
        }
    }

    // --- system
    const YAML::Node sys = doc["system"];
    bool have_system = false;
    if (!sys) {
        rd.error("system", "missing; give a built-in id or an inline linear system");
    } else if (sys.IsScalar()) {
        s.system_id = sys.as<std::string>();
        const auto ids = builtin_system_ids();
        if (std::find(ids.begin(), ids.end(), s.system_id) == ids.end()) {
            rd.error("system", "unknown built-in id '" + s.system_id + "'");
        } else if (s.system_id.rfind("din:", 0) == 0) {
            if (!(din.alpha > 0.0)) rd.error("system_params.alpha", "must be > 0");
            if (!(din.beta > 0.0)) rd.error("system_params.beta", "must be > 0");
            if (din.alpha > 0.0 && din.beta > 0.0 && din.epsilon != 0.0 &&
                !(din.epsilon > 0.0 && din.epsilon < din.epsilon_limit())) {
                std::ostringstream os;
                os << "epsilon = " << din.epsilon << " violates 0 < ε < min{2α/3, 2/β} = " << din.epsilon_limit();
                rd.error("system_params.epsilon", os.str());
            }
            if (rd.diags.empty()) {
                DINParams base = din;
                base.epsilon = 0.0;  // the plain system does not depend on epsilon
                s.bundle = builtin_bundle(s.system_id, base);
                s.bundle.din = din;
                have_system = true;
            }
        } else {
            s.bundle = builtin_bundle(s.system_id);
            if (s.bundle.pd) {
                if (pd_eps < 0.0) rd.error("system_params.epsilon", "must be >= 0");
                s.bundle.pd->epsilon = std::max(pd_eps, 0.0);
                if (etas) {
                    if (etas->size() != 3 || (etas->array() <= 0.0).any())
                        rd.error("system_params.eta", "expected three positive Young parameters");
                    else {
                        s.bundle.pd->eta1 = (*etas)[0];
                        s.bundle.pd->eta2 = (*etas)[1];
                        s.bundle.pd->eta3 = (*etas)[2];
                    }
                }
                try {
                    s.bundle.pd->validate(*s.bundle.objective);
                } catch (const Error& e) {
                    rd.error("system_params", e.what());
                }
            }
            have_system = true;
        }
    } else if (sys.IsMap() && sys["linear"]) {
        s.system_id = "inline";
        const auto A = rd.matrix(sys["linear"]["matrix"], "system.linear.matrix");
        if (A && A->rows() != A->cols()) rd.error("system.linear.matrix", "must be square");
        if (A && A->rows() == A->cols()) {
            State offset = State::Zero(A->rows());
            if (auto c = rd.vector(sys["linear"]["offset"], "system.linear.offset")) {
                if (c->size() != A->rows())
                    rd.error("system.linear.offset", "length does not match the matrix");
                else
                    offset = *c;
            }
            s.bundle.id = "inline";
            s.bundle.system.name = rd.text(sys["name"], "system.name").value_or("inline_linear");
            s.bundle.system.dimension = static_cast<int>(A->rows());
            s.bundle.system.field = [A = *A, offset](const State& x) -> State { return A * x + offset; };
            have_system = true;
        }
    } else {
        rd.error("system", "expected a built-in id or a mapping with a 'linear' block");
    }
    const int dim = have_system ? s.bundle.system.dimension : 0;

    // --- pair
    const YAML::Node pair = doc["pair"];
    const bool inline_pair = pair && pair.IsMap();
    if (pair && !inline_pair && !(pair.IsScalar() && pair.as<std::string>() == "builtin"))
        rd.error("pair", "expected 'builtin' or an inline quadratic pair");
    if (have_system && s.system_id == "inline" && !inline_pair)
        rd.error("pair", "an inline system needs an inline quadratic pair");
    if (have_system && inline_pair) {
        const auto P1 = rd.matrix(pair["V1"], "pair.V1");
        const auto Q1 = rd.matrix(pair["N1"], "pair.N1");
        const auto P2 = rd.matrix(pair["V2"], "pair.V2");
        const auto Q2 = rd.matrix(pair["N2"], "pair.N2");
        const double slope = rd.number(pair["h_slope"], "pair.h_slope").value_or(0.0);
        if (slope < 0.0) rd.error("pair.h_slope", "must be >= 0");
        if (!P1) rd.error("pair.V1", "missing quadratic form matrix");
        if (!Q1) rd.error("pair.N1", "missing quadratic form matrix");
        if (P2.has_value() != Q2.has_value()) rd.error("pair", "V2 and N2 must be given together");
        bool dims_ok = true;
        for (const auto& [M, f] : {std::pair{&P1, "pair.V1"}, {&Q1, "pair.N1"}, {&P2, "pair.V2"}, {&Q2, "pair.N2"}}) {
            if (*M && ((*M)->rows() != dim || (*M)->cols() != dim)) {
                rd.error(f, "must be " + std::to_string(dim) + "x" + std::to_string(dim));
                dims_ok = false;
            }
        }
        if (P1 && Q1 && dims_ok && P2.has_value() == Q2.has_value()) {
            const SystemSpec field = s.bundle.system;
            auto quad_V = [](Eigen::MatrixXd P) { return [P](const State& x) { return 0.5 * x.dot(P * x); }; };
            auto quad_N = [](Eigen::MatrixXd Q) { return [Q](const State& x) { return x.dot(Q * x); }; };
            auto quad_Vdot = [field](Eigen::MatrixXd P) {
                const Eigen::MatrixXd S = 0.5 * (P + P.transpose());
                return ScalarField([S, field](const State& x) { return x.dot(S * field(x)); });
            };
            if (P2) {
                s.bundle.pair = LyapunovPair::composite(quad_V(*P1), quad_N(*Q1), quad_V(*P2), quad_N(*Q2),
                                                        [slope](double r) { return slope * r; });
                s.bundle.pair.V1_dot = quad_Vdot(*P1);
                s.bundle.pair.V2_dot = quad_Vdot(*P2);
            } else {
                s.bundle.pair = LyapunovPair::single(quad_V(*P1), quad_N(*Q1), quad_Vdot(*P1));
                if (slope != 0.0) rd.error("pair.h_slope", "single-function pairs have no interaction term");
            }
            s.bundle.known_slope.reset();
        }
    }

    // --- critical set
    const YAML::Node cs = doc["critical_set"];
    if (cs && !(cs.IsScalar() && cs.as<std::string>() == "builtin")) {
        if (!cs.IsMap()) {
            rd.error("critical_set", "expected 'builtin', {point: [...]} or {affine: {...}}");
        } else if (cs["point"]) {
            if (auto p = rd.vector(cs["point"], "critical_set.point")) {
                if (p->size() != dim)
                    rd.error("critical_set.point", "dimension does not match the system");
                else
                    s.bundle.critical_set = CriticalSetSpec::point(*p);
            }
        } else if (cs["affine"]) {
            const auto base = rd.vector(cs["affine"]["basepoint"], "critical_set.affine.basepoint");
            const auto D = rd.matrix(cs["affine"]["directions"], "critical_set.affine.directions");
            if (!base) rd.error("critical_set.affine.basepoint", "missing");
            if (base && base->size() != dim) rd.error("critical_set.affine.basepoint", "dimension does not match");
            if (base && D && base->size() == dim) {
                if (D->cols() != dim) {
                    rd.error("critical_set.affine.directions", "each direction must have the system dimension");
                } else {
                    std::vector<State> dirs;
                    for (Eigen::Index i = 0; i < D->rows(); ++i) dirs.push_back(D->row(i).transpose());
                    s.bundle.critical_set = CriticalSetSpec::affine(*base, dirs);
                }
            }
        } else {
            rd.error("critical_set", "expected a 'point' or 'affine' block");
        }
        s.bundle.critical_set_is_equilibrium_set = false;
    }
    if (auto eq = rd.boolean(doc["equilibrium_set"], "equilibrium_set")) s.bundle.critical_set_is_equilibrium_set = *eq;

    // --- initial conditions
    const YAML::Node x0 = doc["x0"];
    if (!x0 || !x0.IsSequence() || x0.size() == 0) {
        rd.error("x0", "at least one initial condition is required");
    } else {
        for (std::size_t k = 0; k < x0.size(); ++k) {
            const std::string f = "x0[" + std::to_string(k) + "]";
            if (auto v = rd.vector(x0[k], f)) {
                if (have_system && v->size() != dim)
                    rd.error(f, "has dimension " + std::to_string(v->size()) + ", system has " + std::to_string(dim));
                s.x0.push_back(*v);
            }
        }
    }

    // --- integrator
    if (const YAML::Node ig = doc["integrator"]) {
        if (auto m = rd.text(ig["method"], "integrator.method")) {
            if (*m == "rk45")
                s.integrator.method = IntegrationMethod::rk45;
            else if (*m == "rk4")
                s.integrator.method = IntegrationMethod::rk4;
            else
                rd.error("integrator.method", "expected rk45 or rk4");
        }
        if (auto v = rd.number(ig["t_end"], "integrator.t_end")) s.integrator.t_end = *v;
        if (auto v = rd.number(ig["dt_init"], "integrator.dt_init")) s.integrator.dt_init = *v;
        if (auto v = rd.number(ig["abs_tol"], "integrator.abs_tol")) s.integrator.abs_tol = *v;
        if (auto v = rd.number(ig["rel_tol"], "integrator.rel_tol")) s.integrator.rel_tol = *v;
        if (auto v = rd.integer(ig["max_steps"], "integrator.max_steps")) s.integrator.max_steps = *v;
        if (auto v = rd.number(ig["dense_output_dt"], "integrator.dense_output_dt")) s.integrator.dense_output_dt = *v;
    }
    try {
        s.integrator.validate();
    } catch (const InvalidInput& e) {
        rd.error("integrator", e.what());
    }

    // --- checks
    const YAML::Node checks = doc["checks"];
    if (!checks) {
        rd.error("checks", "missing; list the checks to run or use 'all'");
    } else if (checks.IsScalar() && checks.as<std::string>() == "all") {
        s.checks.insert(all_checks().begin(), all_checks().end());
    } else if (checks.IsSequence()) {
        for (std::size_t i = 0; i < checks.size(); ++i) {
            const auto name = rd.text(checks[i], "checks[" + std::to_string(i) + "]");
            if (!name) continue;
            if (auto c = parse_check(*name))
                s.checks.insert(*c);
            else
                rd.error("checks[" + std::to_string(i) + "]", "unknown check '" + *name + "'");
        }
    } else {
        rd.error("checks", "expected a list of check names or 'all'");
    }

    if (const YAML::Node th = doc["thresholds"]) {
        if (auto v = rd.number(th["vanishing"], "thresholds.vanishing")) s.vanishing_threshold = *v;
        if (auto v = rd.number(th["distance"], "thresholds.distance")) s.distance_threshold = *v;
        s.decay_tol = rd.number(th["decay_tol"], "thresholds.decay_tol");
        if (s.decay_tol && !(*s.decay_tol > 0.0)) rd.error("thresholds.decay_tol", "must be > 0");
    }

    if (const YAML::Node eb = doc["error_bound"]) {
        ErrorBoundParams p;
        p.c = rd.number(eb["c"], "error_bound.c").value_or(0.0);
        if (auto v = rd.number(eb["neighborhood_radius"], "error_bound.neighborhood_radius")) p.neighborhood_radius = *v;
        p.c1 = rd.number(eb["c1"], "error_bound.c1");
        p.c2 = rd.number(eb["c2"], "error_bound.c2");
        if (!eb["c"] && p.c1 && p.c2) p.c = *p.c1 + *p.c2;
        try {
            p.validate();
            s.error_bound = p;
        } catch (const InvalidInput& e) {
            rd.error("error_bound", e.what());
        }
    }

    if (const YAML::Node qg = doc["quadratic_growth"]) {
        QuadraticGrowthParams p;
        p.m = rd.number(qg["m"], "quadratic_growth.m").value_or(0.0);
        p.r = rd.number(qg["r"], "quadratic_growth.r").value_or(0.0);
        p.W_infinity = rd.number(qg["W_infinity"], "quadratic_growth.W_infinity").value_or(0.0);
        try {
            p.validate();
            s.quadratic_growth = p;
        } catch (const InvalidInput& e) {
            rd.error("quadratic_growth", e.what());
        }
    }

    if (const YAML::Node pr = doc["probe"]) {
        if (auto v = rd.integer(pr["equilibria"], "probe.equilibria")) s.probe.equilibria = static_cast<std::size_t>(std::max(0L, *v));
        if (auto v = rd.vector(pr["radii"], "probe.radii")) s.probe.radii.assign(v->data(), v->data() + v->size());
        if (auto v = rd.integer(pr["directions_per_radius"], "probe.directions_per_radius"))
            s.probe.directions_per_radius = static_cast<std::size_t>(std::max(0L, *v));
        if (auto v = rd.number(pr["excursion_factor"], "probe.excursion_factor")) s.probe.excursion_factor = *v;
        if (auto v = rd.number(pr["convergence_threshold"], "probe.convergence_threshold"))
            s.probe.convergence_threshold = *v;
        try {
            s.probe.validate();
        } catch (const InvalidInput& e) {
            rd.error("probe", e.what());
        }
    }

    if (const YAML::Node rt = doc["rates"]) {
        if (auto v = rd.vector(rt["windows"], "rates.windows")) s.window_grid.assign(v->data(), v->data() + v->size());
        if (auto v = rd.number(rt["tail_start"], "rates.tail_start")) {
            if (!(*v >= 0.0 && *v < 1.0))
                rd.error("rates.tail_start", "must lie in [0, 1)");
            else
                s.tail_start = *v;
        }
    }

    // --- slope bound and delta
    if (const YAML::Node sb = doc["slope_bound"]) {
        const auto mode = rd.text(sb["mode"], "slope_bound.mode").value_or("global");
        if (mode == "global")
            s.slope_mode = SlopeMode::global;
        else if (mode == "local")
            s.slope_mode = SlopeMode::local;
        else if (mode == "declared") {
            s.slope_mode = SlopeMode::declared;
            s.declared_slope = rd.number(sb["value"], "slope_bound.value");
            if (!s.declared_slope) rd.error("slope_bound.value", "declared mode needs a value");
        } else {
            rd.error("slope_bound.mode", "expected global, local or declared");
        }
    }
    if (const YAML::Node dp = doc["delta_policy"]) {
        if (dp.IsScalar() && dp.as<std::string>() == "optimal") {
            s.explicit_delta.reset();
        } else if (dp.IsMap() && dp["explicit"]) {
            s.explicit_delta = rd.number(dp["explicit"], "delta_policy.explicit");
        } else {
            rd.error("delta_policy", "expected 'optimal' or {explicit: value}");
        }
    }

    // --- cross-field requirements
    const auto needs = [&](Check c) { return s.checks.count(c) > 0; };
    const bool needs_E = needs(Check::distance) || needs(Check::l2) || needs(Check::subsequence) ||
                         needs(Check::pointwise) || needs(Check::exponential) || needs(Check::classify);
    if (have_system && needs_E && !s.bundle.critical_set)
        rd.error("critical_set", "required by the distance, rate and classify checks");
    if ((needs(Check::l2) || needs(Check::subsequence)) && !s.error_bound)
        rd.error("error_bound", "missing block: the l2 and subsequence checks need error_bound.c");
    if (needs(Check::exponential) && !s.quadratic_growth)
        rd.error("quadratic_growth", "missing block: the exponential check needs quadratic_growth (m, r, W_infinity)");
    if (needs(Check::exponential) && !s.error_bound)
        rd.error("error_bound", "missing block: the exponential check needs error_bound.c");
    if (have_system && needs(Check::classify) && s.bundle.critical_set &&
        s.bundle.critical_set->kind() != CriticalSetKind::point && !s.bundle.critical_set->has_sampler())
        rd.error("critical_set", "classify needs an equilibria sampler for a non-point set");
    if (have_system && needs(Check::perturbed)) {
        if (s.bundle.din) {
            if (!(s.bundle.din->epsilon > 0.0))
                rd.error("system_params.epsilon", "the perturbed check needs epsilon in 0 < ε < min{2α/3, 2/β}");
            if (s.bundle.objective && !s.bundle.objective->convex)
                rd.error("system", "the perturbed check needs a convex objective");
        } else if (s.bundle.pd) {
            if (!s.bundle.objective->gradient_lipschitz_estimate)
                rd.error("system", "the perturbed check needs a gradient Lipschitz estimate");
        } else {
            rd.error("checks", "the perturbed check applies to din:* and pd:* systems only");
        }
    }
    if (have_system && inline_pair && s.slope_mode == SlopeMode::local && s.explicit_delta)
        rd.error("delta_policy", "explicit delta cannot be checked against a local slope bound before integration");

    if (have_system && rd.diags.empty() && s.slope_mode != SlopeMode::local) {
        try {
            const SlopeBound slope = scenario_slope_bound(s);
            if (s.explicit_delta)
                make_certificate(slope, *s.explicit_delta);
            else
                optimal_delta(slope);
        } catch (const InvalidInput& e) {
            rd.error("delta_policy", e.what());
        } catch (const Error& e) {
            rd.error("slope_bound", e.what());
        }
    }

    out.diagnostics = std::move(rd.diags);
    if (out.diagnostics.empty()) out.scenario = std::move(s);
    return out;
}

ScenarioParse parse_scenario_text(const std::string& text) {
    try {
        return parse_scenario(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        ScenarioParse out;
        out.diagnostics.push_back({"<document>", std::string("YAML parse error: ") + e.what()});
        return out;
    }
}

ScenarioParse parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

std::vector<Diagnostic> validate_scenario(const std::string& path) { return parse_scenario_file(path).diagnostics; }

}  // namespace lyacert
