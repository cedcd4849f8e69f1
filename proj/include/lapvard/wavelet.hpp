#pragma once

#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"

namespace lapvard {

// Orthonormal multilevel 2-D Haar transform. The analysis/synthesis pair is a
// square orthogonal operator: synthesize(analyze(u)) == u and the transform
// preserves the l2 norm.
//
// Coefficient vector layout (length side^2):
//   [ approximation block at the coarsest level, (side/2^L)^2 values ]
//   then for each level l = L (coarsest) .. 1 (finest), the three detail
//   blocks of that level, each (side/2^l)^2 values:
//   [ detail-x (high-pass along columns) | detail-y (high-pass along rows)
//     | detail-xy (high-pass along both) ]
//   All blocks are row-major.
//
// n_levels == 0 denotes the identity transform (coefficients == pixels).
struct WaveletBasis {
    Index n_levels = 3;
    Index side = 0;

    Index n_coeffs() const { return side * side; }

    void validate() const {
        if (n_levels < 0) throw std::invalid_argument("WaveletBasis: negative n_levels");
        if (side < 1) throw std::invalid_argument("WaveletBasis: side must be >= 1");
        if (n_levels == 0) return;
        if ((side & (side - 1)) != 0)
            throw std::invalid_argument("WaveletBasis: side must be a power of two");
        if (side < (Index(1) << n_levels))
            throw std::invalid_argument("WaveletBasis: side must be >= 2^n_levels");
    }
};

// beta = Omega^T * u, the forward (analysis) transform.
Vector analyze(const WaveletBasis& basis, const Image& img);

// u = Omega * beta, the inverse (synthesis) transform.
Image synthesize(const WaveletBasis& basis, const Eigen::Ref<const Vector>& coeffs);

// Explicit sparse Omega with pixels as rows and coefficients as columns, so
// forward_project(as_matrix(basis), beta) == synthesize(basis, beta).
SystemMatrix as_matrix(const WaveletBasis& basis);

// 1-D orthonormal Haar steps used for both directions of the 2-D transform.
// Layout: approximation block first, then detail blocks coarse to fine.
Vector haar1d_analyze(const Eigen::Ref<const Vector>& x, Index n_levels);
Vector haar1d_synthesize(const Eigen::Ref<const Vector>& coeffs, Index n_levels);

}  // namespace lapvard
