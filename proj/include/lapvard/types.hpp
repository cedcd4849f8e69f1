#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>

namespace lapvard {

using Real = double;
using Vector = Eigen::VectorX<Real>;
using Matrix = Eigen::MatrixX<Real>;
using Index = Eigen::Index;

// Square pixel grid centered on the origin. Pixel (row, col) has its center at
// x = (col + 0.5) * pixel_size - extent/2, y = extent/2 - (row + 0.5) * pixel_size,
// so row 0 is the top of the image.
struct GridSpec {
    Index n_pixels_per_side = 0;
    Real pixel_size = 1.0;  // mm

    Real extent() const { return pixel_size * static_cast<Real>(n_pixels_per_side); }
    Index n_pixels() const { return n_pixels_per_side * n_pixels_per_side; }

    void validate() const {
        if (n_pixels_per_side < 1)
            throw std::invalid_argument("GridSpec: n_pixels_per_side must be >= 1");
        if (!(pixel_size > 0))
            throw std::invalid_argument("GridSpec: pixel_size must be > 0");
    }
};

// Parallel-beam scan: n_angles view angles uniform over [0, pi), n_detectors
// lateral offsets centered on the origin. Ray index = angle * n_detectors + detector.
struct ScanGeometry {
    Index n_angles = 0;
    Index n_detectors = 0;
    Real detector_spacing = 1.0;  // mm

    Index n_rays() const { return n_angles * n_detectors; }

    void validate() const {
        if (n_angles < 1 || n_detectors < 1)
            throw std::invalid_argument("ScanGeometry: n_angles and n_detectors must be >= 1");
        if (!(detector_spacing > 0))
            throw std::invalid_argument("ScanGeometry: detector_spacing must be > 0");
    }
};

// 2-D attenuation map in mm^-1, row-major.
struct Image {
    Index side = 0;
    Vector pixels;

    Real& at(Index row, Index col) { return pixels[row * side + col]; }
    Real at(Index row, Index col) const { return pixels[row * side + col]; }

    static Image zero(Index side) { return Image{side, Vector::Zero(side * side)}; }
    static Image constant(Index side, Real value) {
        return Image{side, Vector::Constant(side * side, value)};
    }
};

// Per-ray photon counts y_i with their air-scan intensities I_i.
struct Sinogram {
    Vector counts;    // y_i >= 0, stored as reals
    Vector air_scan;  // I_i > 0

    Index n_rays() const { return counts.size(); }

    void validate() const {
        if (counts.size() != air_scan.size())
            throw std::invalid_argument("Sinogram: counts and air_scan length mismatch");
        if ((counts.array() < 0).any())
            throw std::invalid_argument("Sinogram: negative counts");
        if (!(air_scan.array() > 0).all())
            throw std::invalid_argument("Sinogram: air_scan must be strictly positive");
    }
};

}  // namespace lapvard
