#pragma once

#include "lapvard/types.hpp"

#include <vector>

namespace lapvard {

// One additive ellipse in the centered grid coordinate system (mm): a pixel
// whose center falls inside gains `value`.
struct Ellipse {
    Real center_x = 0;
    Real center_y = 0;
    Real semi_axis_x = 1;
    Real semi_axis_y = 1;
    Real rotation_rad = 0;
    Real value = 0;
};

struct EllipsePhantomSpec {
    Real background = 0;
    std::vector<Ellipse> ellipses;
};

// Pixel value = background + sum of values of ellipses containing the pixel
// center. Throws if any resulting attenuation is negative.
Image rasterize_phantom(const EllipsePhantomSpec& spec, const GridSpec& grid);

}  // namespace lapvard
