#include "radsynth/shape.hpp"

#include <cmath>
#include <stdexcept>

#include "radsynth/mesh.hpp"

namespace radsynth {

ShapeFeatures compute_shape(const BinaryMask& mask) {
    const std::int64_t np = mask.pixel_count();
    if (np == 0) throw std::invalid_argument("compute_shape: empty mask");
    const GridGeometry& g = mask.geom;

    ShapeFeatures f;
    f.pixel_surface = double(np) * g.pixel_area();

    BoundaryMesh mesh = boundary_mesh(mask);
    f.mesh_surface = mesh_signed_area(mesh);
    f.perimeter = mesh_perimeter(mesh);
    f.perimeter_surface_ratio = f.perimeter / f.mesh_surface;
    f.sphericity = 2.0 * std::sqrt(M_PI * f.mesh_surface) / f.perimeter;
    f.maximum_diameter = maximum_diameter(mesh);

    // Population covariance of physical pixel centers.
    double mx = 0, my = 0;
    for (int row = 0; row < g.height; ++row)
        for (int col = 0; col < g.width; ++col)
            if (mask.at(row, col)) {
                mx += (col + 0.5) * g.spacing_x;
                my += (row + 0.5) * g.spacing_y;
            }
    mx /= double(np);
    my /= double(np);
    double cxx = 0, cyy = 0, cxy = 0;
    for (int row = 0; row < g.height; ++row)
        for (int col = 0; col < g.width; ++col)
            if (mask.at(row, col)) {
                double dx = (col + 0.5) * g.spacing_x - mx;
                double dy = (row + 0.5) * g.spacing_y - my;
                cxx += dx * dx;
                cyy += dy * dy;
                cxy += dx * dy;
            }
    cxx /= double(np);
    cyy /= double(np);
    cxy /= double(np);

    double tr = cxx + cyy;
    double det = cxx * cyy - cxy * cxy;
    double disc = std::max(0.0, tr * tr - 4 * det);
    double l1 = (tr + std::sqrt(disc)) / 2;
    double l2 = std::max(0.0, (tr - std::sqrt(disc)) / 2);

    f.major_axis_length = 4 * std::sqrt(std::max(0.0, l1));
    f.minor_axis_length = 4 * std::sqrt(l2);
    f.elongation = l1 > 0 ? std::sqrt(l2 / l1) : 1.0;
    return f;
}

}  // namespace radsynth
