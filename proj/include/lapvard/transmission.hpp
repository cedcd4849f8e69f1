#pragma once

#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"

namespace lapvard {

// Line integrals are clamped to this magnitude before exponentiation;
// unreachable for physical inputs but keeps pathological iterates finite.
inline constexpr Real kLineIntegralClamp = 700.0;

// q_i = I_i * exp(-(A x)_i), the Poisson means of the transmission model.
// If n_clamped is given it is incremented once per clamped line integral.
Vector mean_counts(const SystemMatrix& A, const Eigen::Ref<const Vector>& intensities,
                   const Eigen::Ref<const Vector>& x, long* n_clamped = nullptr);

// sum_i [-y_i log q_i + q_i]; constant terms of the Poisson log-likelihood
// (y_i!, y_i log y_i) are dropped.
Real neg_log_likelihood(const Sinogram& sino, const Eigen::Ref<const Vector>& q);

// Gradient of neg_log_likelihood(mean_counts(x)) in x: A^T (y - q(x)).
Vector nll_gradient(const SystemMatrix& A, const Sinogram& sino,
                    const Eigen::Ref<const Vector>& x);

}  // namespace lapvard
