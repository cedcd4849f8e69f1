#include "lapvard/phantom.hpp"

#include <cmath>

namespace lapvard {

Image rasterize_phantom(const EllipsePhantomSpec& spec, const GridSpec& grid) {
    grid.validate();
    for (const Ellipse& e : spec.ellipses)
        if (!(e.semi_axis_x > 0) || !(e.semi_axis_y > 0))
            throw std::invalid_argument("rasterize_phantom: semi-axes must be > 0");

    const Index n = grid.n_pixels_per_side;
    const Real h = grid.extent() / 2;
    Image img = Image::zero(n);
    for (Index r = 0; r < n; ++r) {
        const Real y = h - (static_cast<Real>(r) + Real(0.5)) * grid.pixel_size;
        for (Index c = 0; c < n; ++c) {
            const Real x = (static_cast<Real>(c) + Real(0.5)) * grid.pixel_size - h;
            Real v = spec.background;
            for (const Ellipse& e : spec.ellipses) {
                const Real dx = x - e.center_x;
                const Real dy = y - e.center_y;
                const Real cs = std::cos(e.rotation_rad);
                const Real sn = std::sin(e.rotation_rad);
                const Real u = (cs * dx + sn * dy) / e.semi_axis_x;
                const Real w = (-sn * dx + cs * dy) / e.semi_axis_y;
                if (u * u + w * w <= 1) v += e.value;
            }
            if (v < 0)
                throw std::invalid_argument("rasterize_phantom: negative attenuation");
            img.at(r, c) = v;
        }
    }
    return img;
}

}  // namespace lapvard
