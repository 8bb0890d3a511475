#pragma once

// Serial reference implementations, deliberately independent of the engine's
// code paths: direct-formula feature math, BFS zone labeling, lexicographic
// SOR, quadrature p-values. Linked by the tests (as oracles) and by the
// benchmark; never by the production library or CLI.

#include <array>
#include <cstdint>
#include <vector>

#include "radsynth/firstorder.hpp"
#include "radsynth/grid.hpp"
#include "radsynth/mask.hpp"
#include "radsynth/synth.hpp"
#include "radsynth/texture.hpp"

namespace radsynth::ref {

FirstOrderFeatures first_order_reference(const std::vector<double>& values, double pixel_area,
                                         const DiscretizationConfig& cfg);

// Dense symmetric normalized GLCM for one offset by naive pair enumeration.
// Returns an empty vector when the offset has no valid pair.
std::vector<double> glcm_matrix_reference(const ImageGrid& image, const BinaryMask& mask,
                                          const DiscretizationConfig& cfg,
                                          std::array<int, 2> offset, int* n_levels);

GlcmFeatures glcm_features_reference(const std::vector<double>& matrix, int n_levels);

// Average over the four standard offsets, dropping pairless ones.
GlcmFeatures glcm_features_averaged_reference(const ImageGrid& image, const BinaryMask& mask,
                                              const DiscretizationConfig& cfg);

SizeZoneMatrix glszm_reference(const ImageGrid& image, const BinaryMask& mask,
                               const DiscretizationConfig& cfg);

GlszmFeatures glszm_features_reference(const SizeZoneMatrix& szm);

// Plain lexicographic-sweep SOR with the same stopping contract as the
// parallel red-black kernel.
ImageGrid sor_fill_serial(const ImageGrid& image, const BinaryMask& mask,
                          const SorOptions& opts = {});

// Two-sided Student-t p by adaptive Simpson quadrature of the density.
double student_t_two_sided_p_quadrature(double t, double dof);

// Spearman rho via O(n^2) rank counting and the direct correlation formula.
double spearman_reference(const std::vector<double>& u, const std::vector<double>& v);

}  // namespace radsynth::ref
