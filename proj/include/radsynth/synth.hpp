#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radsynth/features.hpp"
#include "radsynth/grid.hpp"
#include "radsynth/mask.hpp"

namespace radsynth {

// Star-convex tumor model: r(theta) = r0 * (1 + sum_k a_k cos(k theta)
// + b_k sin(k theta)), labeled 1 inside core_ratio*r and 4 in the rim.
struct BlobParams {
    double cx = 0, cy = 0;  // mm
    double r0 = 10;         // mm
    std::array<double, 6> a{};
    std::array<double, 6> b{};
    double core_ratio = 0.5;   // (0.05, 0.95)
    double mu_ncr = 50;        // core intensity mean
    double mu_et = 200;        // rim intensity mean
    double sigma_tex = 5;      // texture noise std
    double smooth_px = 1;      // box blur radius, rounded at render
};

double blob_radius(const BlobParams& p, double theta);
bool blob_radius_positive(const BlobParams& p);  // 720-point grid check

struct SorOptions {
    double omega = 1.9;
    int max_iter = 10000;
    // Residual threshold as a fraction of the boundary intensity range,
    // measured as max |4u - sum(neighbors)| over interior mask pixels.
    double tol_rel = 1e-9;
};

// Replaces in-mask values by the discrete harmonic extension of the
// out-of-mask boundary (red-black SOR), then adds seeded Gaussian noise with
// the std of the 2-pixel outer boundary ring. Out-of-mask pixels are
// bit-identical to the input.
ImageGrid background_fill(const ImageGrid& image, const BinaryMask& mask, std::uint64_t seed,
                          bool noise = true, const SorOptions& opts = {});

std::pair<ImageGrid, LabelGrid> render_blob(const BlobParams& p, const GridGeometry& geom,
                                            const ImageGrid& background, std::uint64_t seed);

struct TargetEntry {
    std::string roi;
    std::string feature;
    double value = 0;
    double weight = 1;
    double scale = 1;
};

struct TargetSpec {
    std::vector<TargetEntry> targets;
    double mask_diameter = 0;  // mm
};

TargetSpec target_spec_from_json(const std::string& json_text);
std::string target_spec_to_json(const TargetSpec& spec);

// Default family weights when conditioning on a full extracted vector:
// shape 1, first-order 1, texture 0.25. Scale = max(|value|, 1).
// The conditioning circle is mask_scale * the union MaximumDiameter.
TargetSpec target_from_features(const FeatureVector& fv, double mask_scale = 1.15,
                                double shape_weight = 1.0, double firstorder_weight = 1.0,
                                double texture_weight = 0.25);

struct SynthesisResult {
    ImageGrid image;
    LabelGrid labels;
    FeatureVector achieved;
    BlobParams params;
    double objective = 0;
    long evaluations = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<long, double>> trace;  // (evaluation, best objective)
};

// Simulated annealing over BlobParams; proposals that leave the conditioning
// circle (or break r(theta) > 0) are rejected without spending budget.
// Geometric cooling T_k = T0 * 0.995^k with T0 = initial objective.
SynthesisResult synthesize(const ImageGrid& background, double mask_cx, double mask_cy,
                           const TargetSpec& target, std::uint64_t seed, long budget);

// Seeded test image: smooth cosine background plus one planted random blob.
std::pair<ImageGrid, LabelGrid> make_phantom(std::uint64_t seed, const GridGeometry& geom);

// BackgroundFill over the {1,2,4} union, then synthesis at the new center.
// Without a target this is removal only (labels all zero).
SynthesisResult replace_tumor(const ImageGrid& image, const LabelGrid& labels, double new_cx,
                              double new_cy, const TargetSpec* target, std::uint64_t seed,
                              long budget, bool fill_noise = true);

}  // namespace radsynth
