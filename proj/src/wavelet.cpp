#include "lapvard/wavelet.hpp"

#include <cmath>
#include <vector>

namespace lapvard {

namespace {

const Real kInvSqrt2 = Real(1) / std::sqrt(Real(2));

// One analysis step over the leading n entries of x: even/odd pairs map to
// (sum, difference) / sqrt(2), lows packed first.
void step_analyze(Real* x, Index n, Real* scratch) {
    const Index h = n / 2;
    for (Index j = 0; j < h; ++j) {
        const Real a = x[2 * j];
        const Real b = x[2 * j + 1];
        scratch[j] = (a + b) * kInvSqrt2;
        scratch[h + j] = (a - b) * kInvSqrt2;
    }
    for (Index j = 0; j < n; ++j) x[j] = scratch[j];
}

void step_synthesize(Real* x, Index n, Real* scratch) {
    const Index h = n / 2;
    for (Index j = 0; j < h; ++j) {
        const Real lo = x[j];
        const Real hi = x[h + j];
        scratch[2 * j] = (lo + hi) * kInvSqrt2;
        scratch[2 * j + 1] = (lo - hi) * kInvSqrt2;
    }
    for (Index j = 0; j < n; ++j) x[j] = scratch[j];
}

// In-place multilevel steps on the top-left m x m block of M.
void analyze_block(Matrix& M, Index m, std::vector<Real>& row_buf, std::vector<Real>& scratch) {
    for (Index r = 0; r < m; ++r) {
        for (Index c = 0; c < m; ++c) row_buf[c] = M(r, c);
        step_analyze(row_buf.data(), m, scratch.data());
        for (Index c = 0; c < m; ++c) M(r, c) = row_buf[c];
    }
    for (Index c = 0; c < m; ++c) {
        for (Index r = 0; r < m; ++r) row_buf[r] = M(r, c);
        step_analyze(row_buf.data(), m, scratch.data());
        for (Index r = 0; r < m; ++r) M(r, c) = row_buf[r];
    }
}

void synthesize_block(Matrix& M, Index m, std::vector<Real>& row_buf, std::vector<Real>& scratch) {
    for (Index c = 0; c < m; ++c) {
        for (Index r = 0; r < m; ++r) row_buf[r] = M(r, c);
        step_synthesize(row_buf.data(), m, scratch.data());
        for (Index r = 0; r < m; ++r) M(r, c) = row_buf[r];
    }
    for (Index r = 0; r < m; ++r) {
        for (Index c = 0; c < m; ++c) row_buf[c] = M(r, c);
        step_synthesize(row_buf.data(), m, scratch.data());
        for (Index c = 0; c < m; ++c) M(r, c) = row_buf[c];
    }
}

void copy_block_out(const Matrix& M, Index r0, Index c0, Index m, Real* dst) {
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < m; ++c) *dst++ = M(r0 + r, c0 + c);
}

void copy_block_in(Matrix& M, Index r0, Index c0, Index m, const Real* src) {
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < m; ++c) M(r0 + r, c0 + c) = *src++;
}

// Flat layout <-> nested quadrant layout. Blocks per level l = L..1 at block
// side m_l = side >> l: detail-x at (0, m_l), detail-y at (m_l, 0),
// detail-xy at (m_l, m_l); approximation at (0, 0) with side side >> L.
Vector flatten(const Matrix& M, Index side, Index levels) {
    Vector out(side * side);
    Real* dst = out.data();
    const Index ma = side >> levels;
    copy_block_out(M, 0, 0, ma, dst);
    dst += ma * ma;
    for (Index l = levels; l >= 1; --l) {
        const Index m = side >> l;
        copy_block_out(M, 0, m, m, dst);
        dst += m * m;
        copy_block_out(M, m, 0, m, dst);
        dst += m * m;
        copy_block_out(M, m, m, m, dst);
        dst += m * m;
    }
    return out;
}

Matrix unflatten(const Eigen::Ref<const Vector>& coeffs, Index side, Index levels) {
    Matrix M(side, side);
    const Real* src = coeffs.data();
    const Index ma = side >> levels;
    copy_block_in(M, 0, 0, ma, src);
    src += ma * ma;
    for (Index l = levels; l >= 1; --l) {
        const Index m = side >> l;
        copy_block_in(M, 0, m, m, src);
        src += m * m;
        copy_block_in(M, m, 0, m, src);
        src += m * m;
        copy_block_in(M, m, m, m, src);
        src += m * m;
    }
    return M;
}

}  // namespace

Vector analyze(const WaveletBasis& basis, const Image& img) {
    basis.validate();
    if (img.side != basis.side || img.pixels.size() != basis.n_coeffs())
        throw std::invalid_argument("analyze: image size does not match basis");
    if (basis.n_levels == 0) return img.pixels;

    Matrix M(basis.side, basis.side);
    for (Index r = 0; r < basis.side; ++r)
        for (Index c = 0; c < basis.side; ++c) M(r, c) = img.at(r, c);

    std::vector<Real> buf(basis.side), scratch(basis.side);
    for (Index l = 1; l <= basis.n_levels; ++l)
        analyze_block(M, basis.side >> (l - 1), buf, scratch);
    return flatten(M, basis.side, basis.n_levels);
}

Image synthesize(const WaveletBasis& basis, const Eigen::Ref<const Vector>& coeffs) {
    basis.validate();
    if (coeffs.size() != basis.n_coeffs())
        throw std::invalid_argument("synthesize: coefficient length does not match basis");
    if (basis.n_levels == 0) return Image{basis.side, coeffs};

    Matrix M = unflatten(coeffs, basis.side, basis.n_levels);
    std::vector<Real> buf(basis.side), scratch(basis.side);
    for (Index l = basis.n_levels; l >= 1; --l)
        synthesize_block(M, basis.side >> (l - 1), buf, scratch);

    Image img = Image::zero(basis.side);
    for (Index r = 0; r < basis.side; ++r)
        for (Index c = 0; c < basis.side; ++c) img.at(r, c) = M(r, c);
    return img;
}

SystemMatrix as_matrix(const WaveletBasis& basis) {
    basis.validate();
    const Index n = basis.n_coeffs();
    std::vector<Triplet> entries;
    entries.reserve(static_cast<size_t>(n) * (basis.n_levels + 1));
    Vector unit = Vector::Zero(n);
    for (Index k = 0; k < n; ++k) {
        unit[k] = 1;
        const Image column = synthesize(basis, unit);
        for (Index j = 0; j < n; ++j)
            if (column.pixels[j] != Real(0))
                entries.emplace_back(static_cast<int>(j), static_cast<int>(k), column.pixels[j]);
        unit[k] = 0;
    }
    return SystemMatrix::from_triplets(n, n, entries);
}

Vector haar1d_analyze(const Eigen::Ref<const Vector>& x, Index n_levels) {
    const Index n = x.size();
    if (n_levels < 0 || (n_levels > 0 && (n % (Index(1) << n_levels)) != 0))
        throw std::invalid_argument("haar1d_analyze: length not divisible by 2^levels");
    Vector out = x;
    std::vector<Real> scratch(n);
    for (Index l = 1; l <= n_levels; ++l) step_analyze(out.data(), n >> (l - 1), scratch.data());
    return out;
}

Vector haar1d_synthesize(const Eigen::Ref<const Vector>& coeffs, Index n_levels) {
    const Index n = coeffs.size();
    if (n_levels < 0 || (n_levels > 0 && (n % (Index(1) << n_levels)) != 0))
        throw std::invalid_argument("haar1d_synthesize: length not divisible by 2^levels");
    Vector out = coeffs;
    std::vector<Real> scratch(n);
    for (Index l = n_levels; l >= 1; --l) step_synthesize(out.data(), n >> (l - 1), scratch.data());
    return out;
}

}  // namespace lapvard
