#include "lyacert/case_studies.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lyacert {

namespace {

State random_in_unit_ball(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    State u(n);
    do {
        for (int k = 0; k < n; ++k) u[k] = normal(rng);
    } while (u.norm() == 0.0);
    u.normalize();
    return std::pow(unif(rng), 1.0 / n) * u;
}

ObjectiveSpec make_quad_iso() {
    ObjectiveSpec o;
    o.name = "quad_iso";
    o.dim = 2;
    o.value = [](const State& x) { return 0.5 * x.squaredNorm(); };
    o.gradient = [](const State& x) -> State { return x; };
    o.hessian_vector_product = [](const State&, const State& v) -> State { return v; };
    o.convex = true;
    o.gradient_lipschitz_estimate = 1.0;
    o.min_value = 0.0;
    o.argmin_spec = CriticalSetSpec::point(State::Zero(2));
    return o;
}

ObjectiveSpec make_least_squares_line() {
    const State a = (State(2) << 1.0, 1.0).finished();
    const double b = 1.0;
    ObjectiveSpec o;
    o.name = "least_squares_line";
    o.dim = 2;
    o.value = [a, b](const State& x) {
        const double r = a.dot(x) - b;
        return 0.5 * r * r;
    };
    o.gradient = [a, b](const State& x) -> State { return a * (a.dot(x) - b); };
    o.hessian_vector_product = [a](const State&, const State& v) -> State { return a * a.dot(v); };
    o.convex = true;
    o.gradient_lipschitz_estimate = a.squaredNorm();
    o.min_value = 0.0;
    o.argmin_spec = CriticalSetSpec::affine((State(2) << 0.5, 0.5).finished(), {(State(2) << 1.0, -1.0).finished()});
    return o;
}

ObjectiveSpec make_rosenbrock2() {
    ObjectiveSpec o;
    o.name = "rosenbrock2";
    o.dim = 2;
    o.value = [](const State& x) {
        const double p = 1.0 - x[0], q = x[1] - x[0] * x[0];
        return p * p + 100.0 * q * q;
    };
    o.gradient = [](const State& x) -> State {
        const double q = x[1] - x[0] * x[0];
        return (State(2) << -2.0 * (1.0 - x[0]) - 400.0 * x[0] * q, 200.0 * q).finished();
    };
    o.hessian_vector_product = [](const State& x, const State& v) -> State {
        const double h11 = 2.0 - 400.0 * (x[1] - x[0] * x[0]) + 800.0 * x[0] * x[0];
        const double h12 = -400.0 * x[0];
        return (State(2) << h11 * v[0] + h12 * v[1], h12 * v[0] + 200.0 * v[1]).finished();
    };
    o.convex = false;
    o.min_value = 0.0;
    o.argmin_spec = CriticalSetSpec::point((State(2) << 1.0, 1.0).finished());
    return o;
}

ObjectiveSpec make_strongly_convex_aniso() {
    const State d = (State(2) << 1.0, 10.0).finished();
    ObjectiveSpec o;
    o.name = "strongly_convex_aniso";
    o.dim = 2;
    o.value = [d](const State& x) { return 0.5 * x.dot(d.cwiseProduct(x)); };
    o.gradient = [d](const State& x) -> State { return d.cwiseProduct(x); };
    o.hessian_vector_product = [d](const State&, const State& v) -> State { return d.cwiseProduct(v); };
    o.convex = true;
    o.gradient_lipschitz_estimate = 10.0;
    o.min_value = 0.0;
    o.argmin_spec = CriticalSetSpec::point(State::Zero(2));
    return o;
}

void require_dim(const ObjectiveSpec& obj, const State& x, const char* what) {
    if (x.size() != obj.dim) {
        std::ostringstream os;
        os << what << ": expected dimension " << obj.dim << ", got " << x.size();
        throw InvalidInput(os.str());
    }
}

}  // namespace

ObjectiveCheck check_objective(const ObjectiveSpec& obj, std::size_t probes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ObjectiveCheck c;
    const double h = 1e-6;
    for (std::size_t p = 0; p < probes; ++p) {
        const State x = random_in_unit_ball(rng, obj.dim);
        const State g = obj.gradient(x);
        State g_fd(obj.dim);
        for (int i = 0; i < obj.dim; ++i) {
            State xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            g_fd[i] = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
        }
        c.worst_gradient_error = std::max(c.worst_gradient_error, (g - g_fd).norm() / std::max(1.0, g.norm()));

        State v = random_in_unit_ball(rng, obj.dim);
        if (v.norm() > 0.0) v.normalize();
        const State hv = obj.hessian_vector_product(x, v);
        const State hv_fd = (obj.gradient(x + h * v) - obj.gradient(x - h * v)) / (2.0 * h);
        c.worst_hvp_error = std::max(c.worst_hvp_error, (hv - hv_fd).norm() / std::max(1.0, hv.norm()));
    }
    c.pass = c.worst_gradient_error <= 1e-5 && c.worst_hvp_error <= 1e-4;
    return c;
}

std::map<std::string, ObjectiveSpec> builtin_objectives() {
    std::map<std::string, ObjectiveSpec> m;
    for (auto o : {make_quad_iso(), make_least_squares_line(), make_rosenbrock2(), make_strongly_convex_aniso()})
        m.emplace(o.name, std::move(o));
    return m;
}

ObjectiveSpec builtin_objective(const std::string& id) {
    auto all = builtin_objectives();
    const auto it = all.find(id);
    if (it == all.end()) throw InvalidInput("unknown built-in objective '" + id + "'");
    return it->second;
}

// --- inertial dynamics -------------------------------------------------------

double DINParams::epsilon_limit() const { return std::min(2.0 * alpha / 3.0, 2.0 / beta); }

void DINParams::validate() const {
    if (!(alpha > 0.0)) throw InvalidInput("din: alpha must be > 0");
    if (!(beta > 0.0)) throw InvalidInput("din: beta must be > 0");
    if (!(epsilon >= 0.0)) throw InvalidInput("din: epsilon must be >= 0");
    if (epsilon > 0.0 && !(epsilon < epsilon_limit())) {
        std::ostringstream os;
        os << "din: epsilon = " << epsilon << " violates 0 < ε < min{2α/3, 2/β} = " << epsilon_limit();
        throw InvalidInput(os.str());
    }
}

SystemSpec din_system(const ObjectiveSpec& obj, const DINParams& p) {
    p.validate();
    const int n = obj.dim;
    SystemSpec s;
    s.name = "din:" + obj.name;
    s.dimension = 2 * n;
    s.field = [obj, n, alpha = p.alpha, beta = p.beta](const State& y) {
        const auto x = y.head(n);
        const auto v = y.tail(n);
        State out(2 * n);
        out.head(n) = v;
        out.tail(n) = -alpha * v - obj.gradient(x) - beta * obj.hessian_vector_product(x, v);
        return out;
    };
    return s;
}

LyapunovPair din_energy(const ObjectiveSpec& obj, const DINParams& p) {
    p.validate();
    const int n = obj.dim;
    const double alpha = p.alpha, beta = p.beta;
    auto W = [obj, n, alpha, beta](const State& y) {
        const State x = y.head(n);
        return (alpha * beta + 1.0) * obj.value(x) + 0.5 * (y.tail(n) + beta * obj.gradient(x)).squaredNorm();
    };
    auto N = [obj, n, alpha, beta](const State& y) {
        return alpha * y.tail(n).squaredNorm() + beta * obj.gradient(y.head(n)).squaredNorm();
    };
    auto W_dot = [N](const State& y) { return -N(y); };
    LyapunovPair pair = LyapunovPair::single(W, N, W_dot);
    pair.raw_observables["v_sq"] = [n](const State& y) { return y.tail(n).squaredNorm(); };
    pair.raw_observables["grad_sq"] = [obj, n](const State& y) { return obj.gradient(y.head(n)).squaredNorm(); };
    return pair;
}

CriticalSetSpec din_critical_set(const ObjectiveSpec& obj) {
    if (!obj.argmin_spec) throw InvalidInput("objective '" + obj.name + "' has no argmin description");
    return CriticalSetSpec::product({*obj.argmin_spec, CriticalSetSpec::point(State::Zero(obj.dim))});
}

State din_default_anchor(const ObjectiveSpec& obj, const State& x0) {
    if (!obj.argmin_spec || !obj.argmin_spec->has_projector())
        throw InvalidInput("objective '" + obj.name + "' has no argmin projection; supply anchor_z");
    return obj.argmin_spec->project(x0.head(obj.dim));
}

DINPerturbedEnergy din_perturbed_energy(const ObjectiveSpec& obj, const DINParams& p) {
    p.validate();
    if (!obj.convex)
        throw InvalidInput("din_perturbed_energy: objective '" + obj.name +
                           "' is not declared convex; the decay bound needs <grad Phi(x), x - z> >= 0");
    const int n = obj.dim;
    State z = State::Zero(n);
    if (p.epsilon > 0.0) {
        if (!p.anchor_z) throw InvalidInput("din_perturbed_energy: anchor_z is required when epsilon > 0");
        require_dim(obj, *p.anchor_z, "din_perturbed_energy: anchor_z");
        const double g = obj.gradient(*p.anchor_z).norm();
        if (g > 1e-8) {
            std::ostringstream os;
            os << "din_perturbed_energy: anchor_z is not a minimizer (|grad Phi(z)| = " << g << ")";
            throw InvalidInput(os.str());
        }
        z = *p.anchor_z;
    } else if (p.anchor_z) {
        z = *p.anchor_z;
    }

    const double alpha = p.alpha, beta = p.beta, eps = p.epsilon;
    DINPerturbedEnergy out;
    out.anchor = z;
    out.v_coefficient = alpha - 1.5 * eps;
    out.grad_coefficient = beta - 0.5 * beta * beta * eps;
    out.c_eps = std::min(out.v_coefficient, out.grad_coefficient);

    const LyapunovPair base = din_energy(obj, p);
    out.W_eps = [W = base.V1, obj, n, z, alpha, beta, eps](const State& y) {
        const State x = y.head(n);
        const State d = x - z;
        return W(y) + eps * (0.5 * alpha * d.squaredNorm() + (y.tail(n) + beta * obj.gradient(x)).dot(d));
    };
    out.W_eps_dot = [obj, n, z, alpha, beta, eps](const State& y) {
        const State x = y.head(n);
        const State v = y.tail(n);
        const State g = obj.gradient(x);
        return -alpha * v.squaredNorm() - beta * g.squaredNorm() +
               eps * (v.squaredNorm() + beta * g.dot(v) - g.dot(x - z));
    };
    out.decay_bound = [obj, n, c = out.c_eps](const State& y) {
        return -c * (y.tail(n).squaredNorm() + obj.gradient(y.head(n)).squaredNorm());
    };
    return out;
}

// --- primal-dual flow --------------------------------------------------------

void PrimalDualParams::validate(const ObjectiveSpec& obj) const {
    if (A.rows() == 0 || A.cols() == 0) throw InvalidInput("pd: A must be nonempty");
    if (b.size() != A.rows()) throw InvalidInput("pd: b has length " + std::to_string(b.size()) +
                                                 ", A has " + std::to_string(A.rows()) + " rows");
    if (obj.dim != A.cols())
        throw InvalidInput("pd: objective dimension " + std::to_string(obj.dim) + " does not match A with " +
                           std::to_string(A.cols()) + " columns");
    if (x_star.size() != A.cols() || lambda_star.size() != A.rows())
        throw InvalidInput("pd: saddle point dimensions do not match A");
    const double stat = (obj.gradient(x_star) + A.transpose() * lambda_star).norm();
    const double feas = (A * x_star - b).norm();
    if (stat > 1e-8 || feas > 1e-10) {
        std::ostringstream os;
        os << "pd: (x*, lambda*) is not a KKT point (stationarity " << stat << ", feasibility " << feas << ")";
        throw InvalidInput(os.str());
    }
    if (!(eta1 > 0.0 && eta2 > 0.0 && eta3 > 0.0)) throw InvalidInput("pd: Young parameters must be > 0");
    if (!(epsilon >= 0.0)) throw InvalidInput("pd: epsilon must be >= 0");
    if (epsilon > 0.0) {
        const double a1 = 1.0 + epsilon - 2.0 * epsilon * eta1;
        const double a2 = 1.0 + epsilon - 2.0 * epsilon * (eta2 + eta3);
        if (!(a1 > 0.0 && a2 > 0.0)) throw InvalidInput("pd: a1 = 1+ε-2εη1 and a2 = 1+ε-2ε(η2+η3) must be > 0");
    }
}

SystemSpec pd_system(const ObjectiveSpec& obj, const PrimalDualParams& p) {
    p.validate(obj);
    const int n = p.n(), m = p.m();
    SystemSpec s;
    s.name = "pd:" + obj.name;
    s.dimension = n + m;
    s.field = [obj, A = p.A, b = p.b, n, m](const State& y) {
        const State x = y.head(n);
        const State lambda = y.tail(m);
        State out(n + m);
        out.head(n) = -obj.gradient(x) - A.transpose() * lambda;
        out.tail(m) = A * x - b;
        return out;
    };
    return s;
}

namespace {

struct PdTerms {
    double W;
    double primal_sq;  // |Ax - b|^2
    double dual_sq;    // |grad Phi + A^T lambda|^2
};

PdTerms pd_terms(const ObjectiveSpec& obj, const PrimalDualParams& p, double phi_star, const State& y) {
    const int n = p.n(), m = p.m();
    const State x = y.head(n);
    const State lambda = y.tail(m);
    const State r = p.A * x - p.b;
    const State g = obj.gradient(x) + p.A.transpose() * lambda;
    const double W = obj.value(x) - phi_star + 0.5 * r.squaredNorm() + 0.5 * (lambda - p.lambda_star).squaredNorm();
    return {W, r.squaredNorm(), g.squaredNorm()};
}

}  // namespace

LyapunovPair pd_energy(const ObjectiveSpec& obj, const PrimalDualParams& p) {
    p.validate(obj);
    const double phi_star = obj.value(p.x_star);
    auto W = [obj, p, phi_star](const State& y) { return pd_terms(obj, p, phi_star, y).W; };
    auto N = [obj, p, phi_star](const State& y) {
        const auto t = pd_terms(obj, p, phi_star, y);
        return t.primal_sq + t.dual_sq;
    };
    auto W_dot = [N](const State& y) { return -N(y); };
    LyapunovPair pair = LyapunovPair::single(W, N, W_dot);
    pair.raw_observables["primal_residual_sq"] = [obj, p, phi_star](const State& y) {
        return pd_terms(obj, p, phi_star, y).primal_sq;
    };
    pair.raw_observables["dual_residual_sq"] = [obj, p, phi_star](const State& y) {
        return pd_terms(obj, p, phi_star, y).dual_sq;
    };
    return pair;
}

CriticalSetSpec pd_critical_set(const PrimalDualParams& p) {
    State s(p.n() + p.m());
    s << p.x_star, p.lambda_star;
    return CriticalSetSpec::point(s);
}

SublevelSampling sampling_from_trajectory(const ObjectiveSpec& obj, const PrimalDualParams& p, const Trajectory& traj) {
    const double phi_star = obj.value(p.x_star);
    SublevelSampling s;
    s.center = State(p.n() + p.m());
    s.center << p.x_star, p.lambda_star;
    double extent = 0.0;
    s.W0 = -std::numeric_limits<double>::infinity();
    for (const State& y : traj.states) {
        s.W0 = std::max(s.W0, pd_terms(obj, p, phi_star, y).W);
        extent = std::max(extent, (y - s.center).lpNorm<Eigen::Infinity>());
    }
    s.half_width = 1.5 * std::max(extent, 1e-6);
    return s;
}

PDPerturbedEnergy pd_perturbed_energy(const ObjectiveSpec& obj, const PrimalDualParams& p,
                                      const SublevelSampling& sampling) {
    p.validate(obj);
    if (!obj.gradient_lipschitz_estimate)
        throw InvalidInput("pd_perturbed_energy: objective '" + obj.name + "' needs gradient_lipschitz_estimate");
    if (!std::isfinite(sampling.W0)) throw InvalidInput("pd_perturbed_energy: sublevel value W0 must be finite");

    const int n = p.n(), m = p.m();
    const double phi_star = obj.value(p.x_star);
    const double eps = p.epsilon;
    const double lip = *obj.gradient_lipschitz_estimate;

    PDPerturbedEnergy out;
    out.W_eps = [obj, p, phi_star, n, m, eps](const State& y) {
        const State x = y.head(n);
        const State lambda = y.tail(m);
        const State r = p.A * x - p.b;
        const State g = obj.gradient(x) + p.A.transpose() * lambda;
        const double W =
            obj.value(x) - phi_star + 0.5 * r.squaredNorm() + 0.5 * (lambda - p.lambda_star).squaredNorm();
        return W + eps * ((x - p.x_star).dot(g) - (lambda - p.lambda_star).dot(r));
    };

    PrimalDualConstants& k = out.constants;
    k.A_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(p.A).singularValues()(0);
    k.a1 = 1.0 + eps - 2.0 * eps * p.eta1;
    k.a2 = 1.0 + eps - 2.0 * eps * (p.eta2 + p.eta3);

    State center = sampling.center;
    if (center.size() == 0) {
        center = State(n + m);
        center << p.x_star, p.lambda_star;
    }
    if (center.size() != n + m) throw InvalidInput("pd_perturbed_energy: sampling center has wrong dimension");
    const double half = sampling.half_width > 0.0 ? sampling.half_width
                                                  : 2.0 * std::sqrt(2.0 * std::max(sampling.W0, 0.0)) + 1.0;
    State saddle(n + m);
    saddle << p.x_star, p.lambda_star;

    std::mt19937_64 rng(sampling.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double C_x = 0.0, kappa = 0.0;
    for (std::size_t draw = 0; draw < sampling.max_draws && k.samples < sampling.target_samples; ++draw) {
        State y(n + m);
        for (int i = 0; i < n + m; ++i) y[i] = center[i] + half * unif(rng);
        const PdTerms t = pd_terms(obj, p, phi_star, y);
        if (t.W > sampling.W0) continue;
        ++k.samples;
        if ((y - saddle).norm() < 1e-9) continue;
        if (t.W <= 0.0) {
            ++k.nonpositive_W_samples;
            continue;
        }
        C_x = std::max(C_x, (y.head(n) - p.x_star).squaredNorm() / t.W);
        const double diss = t.primal_sq + t.dual_sq;
        kappa = diss > 0.0 ? std::max(kappa, t.W / diss) : std::numeric_limits<double>::infinity();
    }
    k.C_x = C_x;
    k.kappa = kappa;
    const double A2 = k.A_norm * k.A_norm;
    k.c0 = (A2 / (8.0 * p.eta1) + lip * lip / (8.0 * p.eta3)) * C_x + A2 / (4.0 * p.eta2);

    const double eta_max = std::max(p.eta1, p.eta2 + p.eta3);
    const double denom = 2.0 * k.c0 * k.kappa - (1.0 - 2.0 * eta_max);
    if (std::isfinite(denom)) out.max_admissible_epsilon = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();

    if (eps == 0.0) {
        k.c1 = k.a1;
        k.c2 = k.a2;
        out.outcome = PerturbedOutcome::certified;
        out.note = "epsilon = 0: W_eps = W, no correction term";
        return out;
    }
    if (k.samples < sampling.target_samples) {
        std::ostringstream os;
        os << "only " << k.samples << " of " << sampling.target_samples << " sublevel samples accepted";
        out.note = os.str();
        out.outcome = PerturbedOutcome::no_certificate;
        return out;
    }
    if (k.nonpositive_W_samples > 0) {
        std::ostringstream os;
        os << k.nonpositive_W_samples
           << " sublevel samples away from the saddle have W <= 0; |x - x*|^2 <= C_x W cannot hold";
        out.note = os.str();
        out.outcome = PerturbedOutcome::no_certificate;
        return out;
    }
    if (!std::isfinite(k.kappa)) {
        out.note = "N1 + N2 vanishes away from the saddle; kappa is unbounded";
        out.outcome = PerturbedOutcome::no_certificate;
        return out;
    }
    const double correction = eps * k.c0 * k.kappa;
    if (correction > 0.5 * std::min(k.a1, k.a2)) {
        std::ostringstream os;
        os << "ε c0 κ = " << correction << " exceeds min{a1, a2}/2 = " << 0.5 * std::min(k.a1, k.a2);
        out.note = os.str();
        out.outcome = PerturbedOutcome::needs_smaller_epsilon;
        return out;
    }
    k.c1 = k.a1 - correction;
    k.c2 = k.a2 - correction;
    out.outcome = PerturbedOutcome::certified;
    out.note = "c1, c2 are sampled estimates";
    return out;
}

PrimalDualInstance builtin_pd_instance(const std::string& id) {
    if (id != "quad_iso_eqcon") throw InvalidInput("unknown built-in primal-dual instance '" + id + "'");
    PrimalDualInstance inst;
    inst.objective = make_quad_iso();
    inst.params.A = Eigen::MatrixXd(1, 2);
    inst.params.A << 1.0, 1.0;
    inst.params.b = Eigen::VectorXd::Constant(1, 1.0);
    inst.params.x_star = (State(2) << 0.5, 0.5).finished();
    inst.params.lambda_star = State::Constant(1, -0.5);
    return inst;
}

}  // namespace lyacert
