#pragma once

#include "lapvard/types.hpp"

#include <cmath>
#include <limits>

namespace lapvard {

// Root mean square difference of two equally sized vectors or expressions.
template <class A, class B>
Real rmse(const Eigen::MatrixBase<A>& reconstruction, const Eigen::MatrixBase<B>& truth) {
    if (reconstruction.size() != truth.size())
        throw std::invalid_argument("rmse: size mismatch");
    if (reconstruction.size() == 0) throw std::invalid_argument("rmse: empty input");
    return std::sqrt((reconstruction - truth).squaredNorm() /
                     static_cast<Real>(reconstruction.size()));
}

inline Real rmse(const Image& reconstruction, const Image& truth) {
    if (reconstruction.side != truth.side) throw std::invalid_argument("rmse: size mismatch");
    return rmse(reconstruction.pixels, truth.pixels);
}

// 20 log10(peak / rmse) in dB; +infinity for an exact match.
inline Real psnr_from_rmse(Real peak, Real rmse_value) {
    if (!(peak > 0)) throw std::invalid_argument("psnr: peak must be > 0");
    if (rmse_value < 0) throw std::invalid_argument("psnr: negative rmse");
    if (rmse_value == 0) return std::numeric_limits<Real>::infinity();
    return 20 * std::log10(peak / rmse_value);
}

template <class A, class B>
Real psnr(const Eigen::MatrixBase<A>& reconstruction, const Eigen::MatrixBase<B>& truth,
          Real peak) {
    return psnr_from_rmse(peak, rmse(reconstruction, truth));
}

inline Real psnr(const Image& reconstruction, const Image& truth, Real peak) {
    return psnr_from_rmse(peak, rmse(reconstruction, truth));
}

// One vertical slice, top to bottom.
inline Vector extract_profile(const Image& img, Index column_index) {
    if (column_index < 0 || column_index >= img.side)
        throw std::out_of_range("extract_profile: column index out of range");
    Vector out(img.side);
    for (Index r = 0; r < img.side; ++r) out[r] = img.at(r, column_index);
    return out;
}

}  // namespace lapvard
