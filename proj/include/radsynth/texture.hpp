#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "radsynth/firstorder.hpp"
#include "radsynth/grid.hpp"
#include "radsynth/mask.hpp"

namespace radsynth {

// Symmetric normalized co-occurrence matrices for the four 2D unit offsets
// (row,col): (0,1), (1,1), (1,0), (1,-1). Offsets with no valid in-mask
// pair are dropped.
struct GlcmSet {
    int n_levels = 0;
    std::vector<std::array<int, 2>> offsets;          // retained offsets
    std::vector<std::vector<double>> matrices;        // per offset, n_levels^2, sums to 1
};

GlcmSet build_glcm(const ImageGrid& image, const BinaryMask& mask,
                   const DiscretizationConfig& cfg);

struct GlcmFeatures {
    double autocorrelation = 0;
    double cluster_prominence = 0;
    double cluster_shade = 0;
    double cluster_tendency = 0;
    double contrast = 0;
    double correlation = 0;
    double difference_average = 0;
    double difference_entropy = 0;
    double difference_variance = 0;
    double id = 0;
    double idm = 0;
    double idmn = 0;
    double idn = 0;
    double imc1 = 0;
    double imc2 = 0;
    double inverse_variance = 0;
    double joint_average = 0;
    double joint_energy = 0;
    double joint_entropy = 0;
    double maximum_probability = 0;
    double mcc = 0;
    double sum_average = 0;
    double sum_entropy = 0;
    double sum_squares = 0;
};

// Per-angle features averaged arithmetically over retained angles. Single-
// gray-level matrices report correlation 1, imc1/imc2 0, mcc 1.
GlcmFeatures glcm_features(const GlcmSet& glcm);

// One matrix only; used by the averaged path and directly by tests.
GlcmFeatures glcm_features_single(const std::vector<double>& matrix, int n_levels);

// Sparse gray-level size-zone matrix: count of 8-connected equal-level zones
// per (level, size) cell.
struct SizeZoneMatrix {
    struct Entry {
        int level;              // gray level value, 1-based
        std::int64_t size;      // zone size in pixels
        double count;           // number of such zones
    };
    std::vector<Entry> entries;  // sorted by (level, size)
    int n_levels = 0;
    std::int64_t max_zone_size = 0;
    std::int64_t n_pixels = 0;
    double n_zones = 0;
};

SizeZoneMatrix build_glszm(const ImageGrid& image, const BinaryMask& mask,
                           const DiscretizationConfig& cfg);

struct GlszmFeatures {
    double gray_level_non_uniformity = 0;
    double gray_level_non_uniformity_normalized = 0;
    double gray_level_variance = 0;
    double high_gray_level_zone_emphasis = 0;
    double large_area_emphasis = 0;
    double large_area_high_gray_level_emphasis = 0;
    double large_area_low_gray_level_emphasis = 0;
    double low_gray_level_zone_emphasis = 0;
    double size_zone_non_uniformity = 0;
    double size_zone_non_uniformity_normalized = 0;
    double small_area_emphasis = 0;
    double small_area_high_gray_level_emphasis = 0;
    double small_area_low_gray_level_emphasis = 0;
    double zone_entropy = 0;
    double zone_percentage = 0;
    double zone_variance = 0;
};

GlszmFeatures glszm_features(const SizeZoneMatrix& szm);

}  // namespace radsynth
