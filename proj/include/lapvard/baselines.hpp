#pragma once

#include "lapvard/report.hpp"
#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"

#include <functional>
#include <utility>

namespace lapvard {

enum class PenaltyKind { None, WaveletL1, NeighborhoodQuadratic };

struct PenaltyConfig {
    PenaltyKind kind = PenaltyKind::None;
    Real weight = 0;
    Index wavelet_levels = 3;  // used by the wavelet-l1 penalty

    void validate() const {
        if (weight < 0) throw std::invalid_argument("PenaltyConfig: weight must be >= 0");
    }
};

struct AmConfig {
    Index n_iterations = 100;
    Real damping = 1.0;

    void validate() const {
        if (n_iterations < 0) throw std::invalid_argument("AmConfig: n_iterations must be >= 0");
        if (!(damping > 0 && damping <= 1))
            throw std::invalid_argument("AmConfig: damping must lie in (0, 1]");
    }
};

// Proximal map of t|x|: shrink toward zero by t.
inline Real soft_threshold(Real x, Real t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0;
}

// Penalized objective: Poisson negative log-likelihood of the image plus the
// configured penalty (weighted l1 norm of its wavelet coefficients, or the
// weighted quadratic over 8-neighbor first differences with 1/sqrt(2)
// diagonal weighting).
Real objective_value(const SystemMatrix& H, const Sinogram& sino, const PenaltyConfig& penalty,
                     const Image& img);

// Alternating-minimization reconstruction: per-pixel exponential-surrogate
// data update, then the penalty step (soft-thresholding of wavelet
// coefficients, or a damped gradient correction for the quadratic neighborhood
// penalty), both safeguarded so the penalized objective never increases.
// The optional observer receives every iterate.
std::pair<Image, SolveReport> run_am(
    const SystemMatrix& H, const Sinogram& sino, const PenaltyConfig& penalty,
    const AmConfig& cfg,
    const std::function<void(Index, const Image&)>& observer = {});

}  // namespace lapvard
