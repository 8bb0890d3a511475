#include "radsynth/firstorder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace radsynth {

Discretized discretize(const std::vector<double>& values, const DiscretizationConfig& cfg) {
    if (values.empty()) throw std::invalid_argument("discretize: empty input");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Discretized out;
    out.bins.resize(values.size());
    if (lo == hi) {
        std::fill(out.bins.begin(), out.bins.end(), 1);
        out.n_levels = 1;
        return out;
    }
    if (cfg.mode == DiscretizationConfig::Mode::fixed_bin_width) {
        if (!(cfg.bin_width > 0)) throw std::invalid_argument("discretize: bin_width must be > 0");
        int n_levels = 1;
        for (std::size_t i = 0; i < values.size(); ++i) {
            int b = int(std::floor((values[i] - lo) / cfg.bin_width)) + 1;
            out.bins[i] = b;
            n_levels = std::max(n_levels, b);
        }
        out.n_levels = n_levels;
    } else {
        if (cfg.bin_count < 2) throw std::invalid_argument("discretize: bin_count must be >= 2");
        const double width = (hi - lo) / cfg.bin_count;
        int n_levels = 1;
        for (std::size_t i = 0; i < values.size(); ++i) {
            int b = int(std::floor((values[i] - lo) / width)) + 1;
            b = std::min(b, cfg.bin_count);  // max value lands in the top bin
            out.bins[i] = b;
            n_levels = std::max(n_levels, b);
        }
        out.n_levels = n_levels;
    }
    return out;
}

double percentile_sorted(const std::vector<double>& sorted_values, double q) {
    const std::size_t n = sorted_values.size();
    if (n == 0) throw std::invalid_argument("percentile of empty vector");
    if (n == 1) return sorted_values[0];
    double r = q * double(n - 1);
    std::size_t lo = std::size_t(std::floor(r));
    if (lo >= n - 1) return sorted_values[n - 1];
    double frac = r - double(lo);
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

// Every accumulation runs over sorted, minimum-shifted values. Sorting makes
// all 18 features exactly permutation-invariant; the minimum shift keeps the
// shift-invariant ones (variance, IQR, range, MAD, rMAD, entropy, uniformity)
// bit-identical under a constant intensity offset. Location features add the
// minimum back at the end.
FirstOrderFeatures compute_first_order(const std::vector<double>& values, double pixel_area,
                                       const DiscretizationConfig& cfg) {
    if (values.empty()) throw std::invalid_argument("compute_first_order: empty input");
    const std::size_t n = values.size();

    std::vector<double> xsorted = values;
    std::sort(xsorted.begin(), xsorted.end());
    const double vmin = xsorted.front(), vmax = xsorted.back();

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = xsorted[i] - vmin;  // sorted, y[0] == 0

    FirstOrderFeatures f;
    f.minimum = vmin;
    f.maximum = vmax;
    f.range = y[n - 1];

    double energy = 0;
    for (double v : xsorted) energy += v * v;
    f.energy = energy;
    f.total_energy = pixel_area * energy;
    f.root_mean_squared = std::sqrt(energy / double(n));

    double sum_y = 0;
    for (double v : y) sum_y += v;
    const double mean_y = sum_y / double(n);
    f.mean = vmin + mean_y;

    double m2 = 0, m3 = 0, m4 = 0, mad = 0;
    for (double v : y) {
        double d = v - mean_y;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        mad += std::fabs(d);
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);
    f.variance = m2;
    f.mean_absolute_deviation = mad / double(n);
    f.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    f.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;

    const double p10_y = percentile_sorted(y, 0.10);
    const double p25_y = percentile_sorted(y, 0.25);
    const double p50_y = percentile_sorted(y, 0.50);
    const double p75_y = percentile_sorted(y, 0.75);
    const double p90_y = percentile_sorted(y, 0.90);
    f.p10 = vmin + p10_y;
    f.median = vmin + p50_y;
    f.p90 = vmin + p90_y;
    f.interquartile_range = p75_y - p25_y;

    double rsum = 0;
    std::size_t rn = 0;
    for (double v : y) {
        if (v < p10_y || v > p90_y) continue;
        rsum += v;
        ++rn;
    }
    if (rn > 0) {
        double rmean = rsum / double(rn);
        double rmad = 0;
        for (double v : y)
            if (v >= p10_y && v <= p90_y) rmad += std::fabs(v - rmean);
        f.robust_mean_absolute_deviation = rmad / double(rn);
    }

    Discretized d = discretize(xsorted, cfg);
    std::vector<std::int64_t> hist(std::size_t(d.n_levels) + 1, 0);
    for (int b : d.bins) ++hist[std::size_t(b)];
    double entropy = 0, uniformity = 0;
    for (int k = 1; k <= d.n_levels; ++k) {
        if (hist[std::size_t(k)] == 0) continue;
        double p = double(hist[std::size_t(k)]) / double(n);
        entropy -= p * std::log2(p);
        uniformity += p * p;
    }
    f.entropy = entropy;
    f.uniformity = uniformity;
    return f;
}

}  // namespace radsynth
