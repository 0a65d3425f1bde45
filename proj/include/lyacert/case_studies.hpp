#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyacert/certificates.hpp"
#include "lyacert/convergence.hpp"
#include "lyacert/dynamics.hpp"

namespace lyacert {

/// Smooth objective Phi with first- and second-order oracles. The Hessian is
/// only ever applied to a vector.
struct ObjectiveSpec {
    std::string name;
    int dim = 0;
    std::function<double(const State&)> value;
    std::function<State(const State&)> gradient;
    std::function<State(const State&, const State&)> hessian_vector_product;  // (x, v) -> H(x) v
    bool convex = false;
    std::optional<double> gradient_lipschitz_estimate;
    std::optional<double> min_value;
    std::optional<CriticalSetSpec> argmin_spec;
};

struct ObjectiveCheck {
    double worst_gradient_error = 0.0;  // relative
    double worst_hvp_error = 0.0;       // relative
    bool pass = false;
};

/// Compares the analytic oracles against central finite differences on
/// `probes` random points of the unit ball.
ObjectiveCheck check_objective(const ObjectiveSpec& obj, std::size_t probes = 100, std::uint64_t seed = 0xC0FFEE);

/// quad_iso, least_squares_line, rosenbrock2, strongly_convex_aniso.
std::map<std::string, ObjectiveSpec> builtin_objectives();
ObjectiveSpec builtin_objective(const std::string& id);

// ---------------------------------------------------------------------------
// Inertial gradient-like dynamics with viscous and Hessian-driven damping.
// State layout y = (x, v).

struct DINParams {
    double alpha = 1.0;
    double beta = 1.0;
    double epsilon = 0.0;
    std::optional<State> anchor_z;

    /// min{2 alpha / 3, 2 / beta}
    double epsilon_limit() const;
    void validate() const;
};

SystemSpec din_system(const ObjectiveSpec& obj, const DINParams& p);

/// Single-function pair: V1 = (alpha beta + 1) Phi + |v + beta grad Phi|^2 / 2,
/// N1 = alpha |v|^2 + beta |grad Phi|^2. The two terms of N1 are exposed as the
/// raw observables "v_sq" and "grad_sq".
LyapunovPair din_energy(const ObjectiveSpec& obj, const DINParams& p);

/// S = Argmin Phi x {0}; needs obj.argmin_spec.
CriticalSetSpec din_critical_set(const ObjectiveSpec& obj);

struct DINPerturbedEnergy {
    ScalarField W_eps;
    ScalarField W_eps_dot;     // exact derivative along the flow
    ScalarField decay_bound;   // -c_eps (|v|^2 + |grad Phi|^2)
    double c_eps = 0.0;
    double v_coefficient = 0.0;     // alpha - 3 eps / 2
    double grad_coefficient = 0.0;  // beta - beta^2 eps / 2
    State anchor;
};

/// W_eps = W + eps (alpha/2 |x - z|^2 + <v + beta grad Phi, x - z>) with the
/// decay certificate W_eps' <= -c_eps (|v|^2 + |grad Phi|^2).
DINPerturbedEnergy din_perturbed_energy(const ObjectiveSpec& obj, const DINParams& p);

/// Default anchor: projection of x0 onto Argmin Phi, taken as the argmin
/// sample closest to x0 for affine sets.
State din_default_anchor(const ObjectiveSpec& obj, const State& x0);

// ---------------------------------------------------------------------------
// Primal-dual (Arrow-Hurwicz-Uzawa) flow for min Phi s.t. Ax = b.
// State layout y = (x, lambda).

struct PrimalDualConstants {
    double A_norm = 0.0;
    double C_x = 0.0;
    double kappa = 0.0;
    double c0 = 0.0;
    double a1 = 1.0;
    double a2 = 1.0;
    double c1 = 1.0;
    double c2 = 1.0;
    std::size_t samples = 0;
    std::size_t nonpositive_W_samples = 0;  // samples away from the saddle with W <= 0
};

struct PrimalDualParams {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    State x_star;
    State lambda_star;
    double epsilon = 0.0;
    double eta1 = 0.25, eta2 = 0.25, eta3 = 0.25;
    std::optional<PrimalDualConstants> estimated_constants;

    int n() const { return static_cast<int>(A.cols()); }
    int m() const { return static_cast<int>(A.rows()); }
    void validate(const ObjectiveSpec& obj) const;
};

SystemSpec pd_system(const ObjectiveSpec& obj, const PrimalDualParams& p);

/// Single-function pair with W = Phi(x) - Phi(x*) + |Ax - b|^2/2 + |lambda - lambda*|^2/2,
/// N1 = |Ax - b|^2, N2 = |grad Phi + A^T lambda|^2 and the closed-form derivative
/// -N1 - N2. Folded as V1 = W, N1' = N1 + N2; raw observables "primal_residual_sq"
/// and "dual_residual_sq".
LyapunovPair pd_energy(const ObjectiveSpec& obj, const PrimalDualParams& p);

/// Unique saddle S = {(x*, lambda*)} when A has full row rank and Phi is strictly convex.
CriticalSetSpec pd_critical_set(const PrimalDualParams& p);

struct SublevelSampling {
    double W0 = 0.0;
    State center;        // box center (defaults to the saddle)
    double half_width = 0.0;  // box half-width (defaults from W0)
    std::size_t target_samples = 10'000;
    std::size_t max_draws = 2'000'000;
    std::uint64_t seed = 0xC0FFEE;
};

enum class PerturbedOutcome { certified, needs_smaller_epsilon, no_certificate };

struct PDPerturbedEnergy {
    ScalarField W_eps;
    PrimalDualConstants constants;
    PerturbedOutcome outcome = PerturbedOutcome::no_certificate;
    std::optional<double> max_admissible_epsilon;
    std::string note;
};

/// W_eps = W + eps (<x - x*, grad Phi + A^T lambda> - <lambda - lambda*, Ax - b>)
/// with sampled estimates of the sublevel constants. The emitted c1, c2 are
/// estimates.
PDPerturbedEnergy pd_perturbed_energy(const ObjectiveSpec& obj, const PrimalDualParams& p,
                                      const SublevelSampling& sampling);

/// Sampling setup covering a reference trajectory: W0 = max W along it, box
/// around its bounding box inflated by 50%.
SublevelSampling sampling_from_trajectory(const ObjectiveSpec& obj, const PrimalDualParams& p, const Trajectory& traj);

/// The quadratic equality-constrained instance: Phi = |x|^2/2, A = [1 1], b = 1.
struct PrimalDualInstance {
    ObjectiveSpec objective;
    PrimalDualParams params;
};
PrimalDualInstance builtin_pd_instance(const std::string& id);

}  // namespace lyacert
