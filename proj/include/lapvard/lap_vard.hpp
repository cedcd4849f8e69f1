#pragma once

#include "lapvard/report.hpp"
#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"

#include <utility>

namespace lapvard {

// Variational state of the Laplace-posterior ARD solver: per-coefficient
// posterior location mu_k, posterior scale b_k > 0 and prior scale gamma_k > 0.
// The free-energy objective is finite only while b_k * max_i |phi_ik| < 1 for
// every coefficient (the moment generating function of the Laplace posterior
// diverges otherwise).
struct VariationalState {
    Vector mu;
    Vector b;
    Vector gamma;

    Index size() const { return mu.size(); }
    void validate() const;
};

struct LapVardConfig {
    Index n_outer = 50;
    int newton_steps_mu = 20;
    int newton_steps_b = 20;
    Real b_domain_margin = 1e-3;  // delta in (0, 1): b_k <= (1 - delta) / max_i|phi_ik|
    Real init_b_scale = 1e-3;
    Vector init_mu;   // empty -> zeros
    Real tol_fve = 0;  // relative change stopping threshold; <= 0 disables

    void validate() const;
};

// Decoupled surrogate for the posterior-location block: per-coefficient
// back-projected counts, exponential-decoupling weights split by the sign of
// phi_ik, and the constant that makes the surrogate touch the objective at the
// expansion point.
struct MuSurrogateTerms {
    Vector b_y;          // Phi^T y
    Vector theta_plus;   // alpha-weighted expected counts over entries with phi_ik >= 0
    Vector theta_minus;  // ... over entries with phi_ik < 0
    Real z1 = 0;         // max_i sum_k |phi_ik|
    Vector expansion;    // mu^(t)
    Real slack_constant = 0;
};

// Separable surrogate for the posterior-scale block built from the convex
// decomposition lemma: per-entry allocation weights r_ik and leave-one-out
// MGF products Q_ik at the anchor. r and q_loo are stored aligned with the
// column-compressed entry order of *phi.
struct BSurrogateTerms {
    const SystemMatrix* phi = nullptr;
    Vector r;                  // nnz values, by_col storage order
    Vector q_loo;              // nnz values, by_col storage order
    Vector mean_counts_at_mu;  // E_i = I_i exp(-(Phi mu)_i)
    Vector anchor;             // b-hat
    Real empty_ray_constant = 0;  // sum of E_i over rays without entries
};

// KL(Laplace(mu, b) || Laplace(0, gamma)) in closed form:
// log(gamma/b) + (b e^{-|mu|/b} + |mu|) / gamma - 1.
Real laplace_kl(Real mu, Real b, Real gamma);

// E_q[q_i] = I_i exp(-(Phi mu)_i) * prod_k 1/(1 - (b_k phi_ik)^2), with the
// product accumulated in log space. Throws std::domain_error naming the
// offending (ray, coefficient) if some b_k |phi_ik| >= 1.
Vector expected_mean_counts(const SystemMatrix& phi, const Eigen::Ref<const Vector>& intensities,
                            const VariationalState& state, long* n_clamped = nullptr);

// The full variational objective
//   sum_i E_q[q_i] + sum_i y_i (Phi mu)_i
//   + sum_k (1/gamma_k)(b_k e^{-|mu_k|/b_k} + |mu_k|)
//   + sum_k log(2 gamma_k) - sum_k log(2 b_k).
Real free_variational_energy(const SystemMatrix& phi, const Sinogram& sino,
                             const VariationalState& state, long* n_clamped = nullptr);

// Closed-form prior-scale update gamma*_k = b_k e^{-|mu_k|/b_k} + |mu_k|.
Vector update_gamma(const VariationalState& state);

MuSurrogateTerms build_mu_surrogate(const SystemMatrix& phi, const Sinogram& sino,
                                    const VariationalState& state,
                                    const Eigen::Ref<const Vector>& expansion_point);

// Surrogate value at a trial location vector (state supplies b and gamma).
Real mu_surrogate_value(const MuSurrogateTerms& terms, const VariationalState& state,
                        const Eigen::Ref<const Vector>& mu);

// Coordinatewise exact minimization of the decoupled location surrogate:
// a sub-gradient optimality test at the kink mu_k = 0 followed by safeguarded
// Newton on the chosen smooth branch. Never increases any coordinate's
// surrogate relative to the expansion point.
Vector minimize_mu_surrogate(const MuSurrogateTerms& terms, const VariationalState& state,
                             const LapVardConfig& cfg);

BSurrogateTerms build_b_surrogate(const SystemMatrix& phi, const Sinogram& sino,
                                  const VariationalState& state,
                                  const Eigen::Ref<const Vector>& anchor);

// Surrogate value at a trial scale vector; +infinity outside the restricted
// domain of the decomposition.
Real b_surrogate_value(const BSurrogateTerms& terms, const VariationalState& state,
                       const Eigen::Ref<const Vector>& b);

// Coordinatewise safeguarded Newton on the scale surrogate, constrained to
// 0 < b_k <= (1 - delta) / max_i |phi_ik|. Columns with no entries are capped
// at init_b_scale * 1e6; cap_hits (if given) counts such caps binding.
Vector minimize_b_surrogate(const BSurrogateTerms& terms, const VariationalState& state,
                            const LapVardConfig& cfg, long* cap_hits = nullptr);

// Exact objective restricted to the terms that depend on the location (resp.
// scale) block; used by the surrogate touching/majorization and descent tests.
Real mu_objective(const SystemMatrix& phi, const Sinogram& sino, const VariationalState& state,
                  const Eigen::Ref<const Vector>& mu);
Real b_objective(const SystemMatrix& phi, const Sinogram& sino, const VariationalState& state,
                 const Eigen::Ref<const Vector>& b);

// N outer iterations of [location update; scale update; prior-scale update],
// recording the objective after every block. The reconstruction is
// synthesize(state.mu) under the basis that built phi.
std::pair<VariationalState, SolveReport> run_lapvard(const SystemMatrix& phi,
                                                     const Sinogram& sino,
                                                     const LapVardConfig& cfg);

}  // namespace lapvard
