#pragma once

#include "lapvard/system_matrix.hpp"
#include "lapvard/types.hpp"
#include "lapvard/wavelet.hpp"

namespace lapvard {

// Builds the parallel-beam system matrix H: entry (i, j) is the intersection
// length (mm) of ray i with pixel j, obtained by an incremental ray-grid
// traversal. Ray i = a * n_detectors + m travels along direction
// (cos phi_a, sin phi_a) with phi_a = pi * a / n_angles, laterally offset by
// t_m = (m - (n_detectors - 1)/2) * detector_spacing along (-sin phi, cos phi).
// Entries below 1e-12 are dropped.
SystemMatrix build_parallel_beam(const GridSpec& grid, const ScanGeometry& geom);

// A * x, summed per row over the stored entries.
Vector forward_project(const SystemMatrix& A, const Eigen::Ref<const Vector>& x);

// A^T * r, summed per column over the stored entries.
Vector back_project(const SystemMatrix& A, const Eigen::Ref<const Vector>& r);

// Explicit sparse product H * Omega mapping wavelet coefficients to line
// integrals; per-column maxima of the result feed the posterior-scale domain
// constraint.
SystemMatrix compose_with_basis(const SystemMatrix& H, const WaveletBasis& basis);

}  // namespace lapvard
