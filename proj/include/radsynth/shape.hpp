#pragma once

#include "radsynth/mask.hpp"

namespace radsynth {

// The 9 two-dimensional shape features. Axis lengths come from the
// population covariance of physical pixel centers (4*sqrt of eigenvalues);
// a single-pixel mask reports axis lengths 0 and elongation 1.
struct ShapeFeatures {
    double elongation = 0;
    double major_axis_length = 0;
    double maximum_diameter = 0;
    double mesh_surface = 0;
    double minor_axis_length = 0;
    double perimeter = 0;
    double perimeter_surface_ratio = 0;
    double pixel_surface = 0;
    double sphericity = 0;
};

ShapeFeatures compute_shape(const BinaryMask& mask);

}  // namespace radsynth
