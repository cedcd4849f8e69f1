#include "lapvard/projector.hpp"

#include "lapvard/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace lapvard {

namespace {

constexpr Real kDropWeight = 1e-12;

struct RaySpec {
    Real px, py;  // a point on the ray
    Real dx, dy;  // unit direction
};

RaySpec ray_for(const ScanGeometry& geom, Index angle_idx, Index det_idx) {
    const Real phi = std::numbers::pi_v<Real> * static_cast<Real>(angle_idx) /
                     static_cast<Real>(geom.n_angles);
    const Real t = (static_cast<Real>(det_idx) - static_cast<Real>(geom.n_detectors - 1) / 2) *
                   geom.detector_spacing;
    const Real c = std::cos(phi);
    const Real s = std::sin(phi);
    return RaySpec{-s * t, c * t, c, s};
}

// Clips the ray against the centered square [-h, h]^2; returns false on miss.
bool clip_to_square(const RaySpec& ray, Real h, Real& s0, Real& s1) {
    s0 = -std::numeric_limits<Real>::infinity();
    s1 = std::numeric_limits<Real>::infinity();
    const Real p[2] = {ray.px, ray.py};
    const Real d[2] = {ray.dx, ray.dy};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::abs(d[axis]) < 1e-15) {
            if (p[axis] < -h || p[axis] > h) return false;
            continue;
        }
        Real a = (-h - p[axis]) / d[axis];
        Real b = (h - p[axis]) / d[axis];
        if (a > b) std::swap(a, b);
        s0 = std::max(s0, a);
        s1 = std::min(s1, b);
    }
    return s0 < s1;
}

// Incremental traversal of the pixel grid along one ray, accumulating
// per-pixel chord lengths into triplets.
void trace_ray(const GridSpec& grid, const RaySpec& ray, Index ray_idx,
               std::vector<Triplet>& out) {
    const Real h = grid.extent() / 2;
    const Index n = grid.n_pixels_per_side;
    Real s0, s1;
    if (!clip_to_square(ray, h, s0, s1)) return;

    const Real inf = std::numeric_limits<Real>::infinity();
    const Real px = grid.pixel_size;
    // Cell coordinates measured from the bottom-left corner of the grid.
    Real x = ray.px + s0 * ray.dx + h;
    Real y = ray.py + s0 * ray.dy + h;
    auto cell_of = [&](Real v) {
        Index c = static_cast<Index>(std::floor(v / px));
        return std::clamp<Index>(c, 0, n - 1);
    };
    Index ix = cell_of(x);
    Index iy = cell_of(y);

    const int step_x = ray.dx > 0 ? 1 : (ray.dx < 0 ? -1 : 0);
    const int step_y = ray.dy > 0 ? 1 : (ray.dy < 0 ? -1 : 0);
    const Real dt_x = step_x != 0 ? px / std::abs(ray.dx) : inf;
    const Real dt_y = step_y != 0 ? px / std::abs(ray.dy) : inf;

    auto boundary_s = [&](Real pos, Real dir, Index cell, int step) {
        if (step == 0) return inf;
        const Real edge = (static_cast<Real>(cell) + (step > 0 ? 1 : 0)) * px;
        return s0 + (edge - pos) / dir;
    };
    Real next_x = boundary_s(x, ray.dx, ix, step_x);
    Real next_y = boundary_s(y, ray.dy, iy, step_y);

    Real s = s0;
    while (s < s1) {
        const Real s_exit = std::min({next_x, next_y, s1});
        const Real len = s_exit - s;
        if (len > kDropWeight) {
            const Index row = n - 1 - iy;  // row 0 at the top
            out.emplace_back(static_cast<int>(ray_idx), static_cast<int>(row * n + ix), len);
        }
        if (s_exit >= s1) break;
        const bool advance_x = next_x <= next_y;
        const bool advance_y = next_y <= next_x;  // both advance on a corner crossing
        if (advance_x) {
            ix += step_x;
            next_x += dt_x;
        }
        if (advance_y) {
            iy += step_y;
            next_y += dt_y;
        }
        if (ix < 0 || ix >= n || iy < 0 || iy >= n) break;
        s = s_exit;
    }
}

}  // namespace

SystemMatrix build_parallel_beam(const GridSpec& grid, const ScanGeometry& geom) {
    grid.validate();
    geom.validate();
    std::vector<Triplet> entries;
    entries.reserve(static_cast<size_t>(geom.n_rays()) * grid.n_pixels_per_side);
    for (Index a = 0; a < geom.n_angles; ++a) {
        for (Index m = 0; m < geom.n_detectors; ++m) {
            const Index i = a * geom.n_detectors + m;
            trace_ray(grid, ray_for(geom, a, m), i, entries);
        }
    }
    return SystemMatrix::from_triplets(geom.n_rays(), grid.n_pixels(), entries);
}

Vector forward_project(const SystemMatrix& A, const Eigen::Ref<const Vector>& x) {
    if (x.size() != A.n_cols())
        throw std::invalid_argument("forward_project: vector length != matrix columns");
    Vector out = Vector::Zero(A.n_rays());
    const SparseRowMajor& m = A.by_row();
    parallel_for(A.n_rays(), [&](Index begin, Index end) {
        for (Index i = begin; i < end; ++i) {
            Real s = 0;
            for (SparseRowMajor::InnerIterator it(m, i); it; ++it) s += it.value() * x[it.col()];
            out[i] = s;
        }
    });
    return out;
}

Vector back_project(const SystemMatrix& A, const Eigen::Ref<const Vector>& r) {
    if (r.size() != A.n_rays())
        throw std::invalid_argument("back_project: vector length != matrix rows");
    Vector out = Vector::Zero(A.n_cols());
    const SparseColMajor& m = A.by_col();
    parallel_for(A.n_cols(), [&](Index begin, Index end) {
        for (Index k = begin; k < end; ++k) {
            Real s = 0;
            for (SparseColMajor::InnerIterator it(m, k); it; ++it) s += it.value() * r[it.row()];
            out[k] = s;
        }
    });
    return out;
}

SystemMatrix compose_with_basis(const SystemMatrix& H, const WaveletBasis& basis) {
    basis.validate();
    if (basis.n_coeffs() != H.n_cols())
        throw std::invalid_argument("compose_with_basis: basis dimension != matrix columns");
    const SystemMatrix omega = as_matrix(basis);
    SparseColMajor product = H.by_col() * omega.by_col();
    return SystemMatrix::from_sparse(std::move(product));
}

}  // namespace lapvard
