#pragma once

#include <vector>

namespace radsynth {

struct DiscretizationConfig {
    enum class Mode { fixed_bin_width, fixed_bin_count };
    Mode mode = Mode::fixed_bin_width;
    double bin_width = 25.0;  // used iff fixed_bin_width
    int bin_count = 32;       // used iff fixed_bin_count

    bool operator==(const DiscretizationConfig&) const = default;
};

struct Discretized {
    std::vector<int> bins;  // 1-based gray levels, parallel to the input
    int n_levels = 0;
};

// fixed_bin_width: bin(x) = floor((x-min)/w) + 1, anchored at the minimum.
// fixed_bin_count: equal-width bins over [min,max], max lands in the top bin.
// Constant input maps everything to level 1.
Discretized discretize(const std::vector<double>& values, const DiscretizationConfig& cfg);

struct FirstOrderFeatures {
    double energy = 0;
    double entropy = 0;
    double interquartile_range = 0;
    double kurtosis = 0;  // non-excess
    double maximum = 0;
    double mean = 0;
    double mean_absolute_deviation = 0;
    double median = 0;
    double minimum = 0;
    double p10 = 0;
    double p90 = 0;
    double range = 0;
    double robust_mean_absolute_deviation = 0;
    double root_mean_squared = 0;
    double skewness = 0;
    double total_energy = 0;  // pixel_area * energy
    double uniformity = 0;
    double variance = 0;  // population
};

FirstOrderFeatures compute_first_order(const std::vector<double>& values, double pixel_area,
                                       const DiscretizationConfig& cfg);

// Linear interpolation at rank q*(N-1) over an ascending-sorted vector.
double percentile_sorted(const std::vector<double>& sorted_values, double q);

}  // namespace radsynth
