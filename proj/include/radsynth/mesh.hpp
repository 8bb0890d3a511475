#pragma once

#include <array>
#include <vector>

#include "radsynth/mask.hpp"

namespace radsynth {

// Closed contour loops in physical mm. Vertices sit at midpoints between
// inside/outside pixel centers; outer loops carry positive signed area,
// holes negative.
struct BoundaryMesh {
    std::vector<std::vector<std::array<double, 2>>> loops;
};

// Marching squares over the mask. Saddle cells treat the cell center as
// inside, so diagonal pixels connect. Throws on an empty mask.
BoundaryMesh boundary_mesh(const BinaryMask& mask);

double mesh_signed_area(const BoundaryMesh& mesh);  // outer minus holes
double mesh_perimeter(const BoundaryMesh& mesh);

// Largest pairwise vertex distance (convex hull + exhaustive hull scan).
double maximum_diameter(const BoundaryMesh& mesh);

}  // namespace radsynth
