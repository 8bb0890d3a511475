#include "radsynth/texture.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace radsynth {

namespace {

// Discretized level per pixel, 0 outside the mask.
std::vector<int> level_grid(const ImageGrid& image, const BinaryMask& mask,
                            const DiscretizationConfig& cfg, int* n_levels,
                            std::int64_t* n_pixels) {
    require_same_geometry(image.geom, mask.geom, "texture");
    std::vector<double> vals;
    std::vector<std::size_t> idx;
    vals.reserve(1024);
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        if (mask.bits[i]) {
            vals.push_back(image.values[i]);
            idx.push_back(i);
        }
    if (vals.empty()) throw std::invalid_argument("texture: empty mask");
    Discretized d = discretize(vals, cfg);
    std::vector<int> levels(mask.bits.size(), 0);
    for (std::size_t k = 0; k < idx.size(); ++k) levels[idx[k]] = d.bins[k];
    *n_levels = d.n_levels;
    *n_pixels = std::int64_t(idx.size());
    return levels;
}

// Cyclic Jacobi rotations; returns eigenvalues sorted descending.
std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
    double norm = 0;
    for (double v : a) norm += v * v;
    const double stop = norm * 1e-26 + 1e-300;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        if (off <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (a[q * n + q] - a[p * n + p]) / (2 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ev[std::size_t(i)] = a[std::size_t(i) * n + i];
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

double glcm_mcc(const std::vector<double>& p, const std::vector<double>& px, int L) {
    std::vector<int> present;
    for (int i = 0; i < L; ++i)
        if (px[std::size_t(i)] > 0) present.push_back(i);
    const int m = int(present.size());
    if (m <= 1) return 1.0;

    // Q = D^-1 B with B symmetric; eigenvalues taken from the similar
    // symmetric matrix S = D^-1/2 B D^-1/2.
    std::vector<double> s(std::size_t(m) * m, 0.0);
    for (int ii = 0; ii < m; ++ii) {
        for (int jj = ii; jj < m; ++jj) {
            int i = present[std::size_t(ii)], j = present[std::size_t(jj)];
            double b = 0;
            for (int kk = 0; kk < m; ++kk) {
                int k = present[std::size_t(kk)];
                b += p[std::size_t(i) * L + k] * p[std::size_t(j) * L + k] / px[std::size_t(k)];
            }
            double v = b / std::sqrt(px[std::size_t(i)] * px[std::size_t(j)]);
            s[std::size_t(ii) * m + jj] = v;
            s[std::size_t(jj) * m + ii] = v;
        }
    }
    std::vector<double> ev = jacobi_eigenvalues(std::move(s), m);
    return std::sqrt(std::max(0.0, ev[1]));
}

}  // namespace

GlcmSet build_glcm(const ImageGrid& image, const BinaryMask& mask,
                   const DiscretizationConfig& cfg) {
    int L = 0;
    std::int64_t np = 0;
    std::vector<int> levels = level_grid(image, mask, cfg, &L, &np);
    const int w = mask.geom.width, h = mask.geom.height;

    static const std::array<std::array<int, 2>, 4> kOffsets{{{0, 1}, {1, 1}, {1, 0}, {1, -1}}};
    std::array<std::vector<double>, 4> mats;
    std::array<bool, 4> keep{};

#pragma omp parallel for schedule(static)
    for (int a = 0; a < 4; ++a) {
        const int dr = kOffsets[std::size_t(a)][0], dc = kOffsets[std::size_t(a)][1];
        std::vector<double> counts(std::size_t(L) * L, 0.0);
        double total = 0;
        for (int r = 0; r < h; ++r) {
            int rr = r + dr;
            if (rr < 0 || rr >= h) continue;
            for (int c = 0; c < w; ++c) {
                int cc = c + dc;
                if (cc < 0 || cc >= w) continue;
                int li = levels[std::size_t(r) * w + c];
                int lj = levels[std::size_t(rr) * w + cc];
                if (li == 0 || lj == 0) continue;
                counts[std::size_t(li - 1) * L + (lj - 1)] += 1.0;
                counts[std::size_t(lj - 1) * L + (li - 1)] += 1.0;  // symmetrize
                total += 2.0;
            }
        }
        if (total > 0) {
            for (double& v : counts) v /= total;
            mats[std::size_t(a)] = std::move(counts);
            keep[std::size_t(a)] = true;
        }
    }

    GlcmSet out;
    out.n_levels = L;
    for (int a = 0; a < 4; ++a) {
        if (!keep[std::size_t(a)]) continue;
        out.offsets.push_back(kOffsets[std::size_t(a)]);
        out.matrices.push_back(std::move(mats[std::size_t(a)]));
    }
    if (out.matrices.empty())
        throw std::invalid_argument("build_glcm: no valid pixel pair for any offset");
    return out;
}

GlcmFeatures glcm_features_single(const std::vector<double>& p, int L) {
    if (std::size_t(L) * L != p.size())
        throw std::invalid_argument("glcm_features_single: bad matrix size");

    std::vector<double> px(std::size_t(L), 0.0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) px[std::size_t(i)] += p[std::size_t(i) * L + j];

    int present = 0;
    for (int i = 0; i < L; ++i)
        if (px[std::size_t(i)] > 0) ++present;

    double mu = 0;
    for (int i = 0; i < L; ++i) mu += double(i + 1) * px[std::size_t(i)];
    double sigma2 = 0;
    for (int i = 0; i < L; ++i)
        sigma2 += (double(i + 1) - mu) * (double(i + 1) - mu) * px[std::size_t(i)];

    // Sum/difference marginals, indexed by the value of i+j and |i-j|.
    std::vector<double> psum(std::size_t(2 * L + 1), 0.0);
    std::vector<double> pdiff(std::size_t(L), 0.0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            double v = p[std::size_t(i) * L + j];
            if (v == 0) continue;
            psum[std::size_t(i + j + 2)] += v;
            pdiff[std::size_t(std::abs(i - j))] += v;
        }

    GlcmFeatures f;
    double hxy = 0, hxy1 = 0, hxy2 = 0, hx = 0;
    for (int i = 0; i < L; ++i) {
        double m = px[std::size_t(i)];
        if (m > 0) hx -= m * std::log2(m);
        for (int j = 0; j < L; ++j) {
            double v = p[std::size_t(i) * L + j];
            double prod = px[std::size_t(i)] * px[std::size_t(j)];
            double li = double(i + 1), lj = double(j + 1);
            if (v > 0) {
                f.autocorrelation += li * lj * v;
                f.joint_average += li * v;
                double cdev = li + lj - 2 * mu;
                f.cluster_tendency += cdev * cdev * v;
                f.cluster_shade += cdev * cdev * cdev * v;
                f.cluster_prominence += cdev * cdev * cdev * cdev * v;
                f.contrast += (li - lj) * (li - lj) * v;
                f.joint_energy += v * v;
                hxy -= v * std::log2(v);
                if (prod > 0) hxy1 -= v * std::log2(prod);
                f.id += v / (1 + std::fabs(li - lj));
                f.idm += v / (1 + (li - lj) * (li - lj));
                f.idn += v / (1 + std::fabs(li - lj) / L);
                f.idmn += v / (1 + (li - lj) * (li - lj) / (double(L) * L));
                if (i != j) f.inverse_variance += v / ((li - lj) * (li - lj));
                f.maximum_probability = std::max(f.maximum_probability, v);
                f.sum_squares += (li - mu) * (li - mu) * v;
            }
            if (prod > 0) hxy2 -= prod * std::log2(prod);
        }
    }
    f.joint_entropy = hxy;

    for (int k = 2; k <= 2 * L; ++k) {
        double v = psum[std::size_t(k)];
        if (v == 0) continue;
        f.sum_average += double(k) * v;
        f.sum_entropy -= v * std::log2(v);
    }
    for (int k = 0; k < L; ++k) {
        double v = pdiff[std::size_t(k)];
        if (v == 0) continue;
        f.difference_average += double(k) * v;
        f.difference_entropy -= v * std::log2(v);
    }
    for (int k = 0; k < L; ++k) {
        double v = pdiff[std::size_t(k)];
        if (v == 0) continue;
        double d = double(k) - f.difference_average;
        f.difference_variance += d * d * v;
    }

    if (present <= 1 || sigma2 <= 0) {
        f.correlation = 1.0;
        f.imc1 = 0.0;
        f.imc2 = 0.0;
    } else {
        f.correlation = (f.autocorrelation - mu * mu) / sigma2;
        double hmax = hx;  // symmetric matrix: HX == HY
        f.imc1 = hmax > 0 ? (hxy - hxy1) / hmax : 0.0;
        f.imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));
    }
    f.mcc = glcm_mcc(p, px, L);
    return f;
}

GlcmFeatures glcm_features(const GlcmSet& glcm) {
    const std::size_t na = glcm.matrices.size();
    if (na == 0) throw std::invalid_argument("glcm_features: no retained angles");
    std::vector<GlcmFeatures> per(na);
    for (std::size_t a = 0; a < na; ++a)
        per[a] = glcm_features_single(glcm.matrices[a], glcm.n_levels);

    static constexpr double GlcmFeatures::*kMembers[] = {
        &GlcmFeatures::autocorrelation, &GlcmFeatures::cluster_prominence,
        &GlcmFeatures::cluster_shade,   &GlcmFeatures::cluster_tendency,
        &GlcmFeatures::contrast,        &GlcmFeatures::correlation,
        &GlcmFeatures::difference_average, &GlcmFeatures::difference_entropy,
        &GlcmFeatures::difference_variance, &GlcmFeatures::id,
        &GlcmFeatures::idm,             &GlcmFeatures::idmn,
        &GlcmFeatures::idn,             &GlcmFeatures::imc1,
        &GlcmFeatures::imc2,            &GlcmFeatures::inverse_variance,
        &GlcmFeatures::joint_average,   &GlcmFeatures::joint_energy,
        &GlcmFeatures::joint_entropy,   &GlcmFeatures::maximum_probability,
        &GlcmFeatures::mcc,             &GlcmFeatures::sum_average,
        &GlcmFeatures::sum_entropy,     &GlcmFeatures::sum_squares,
    };

    // Per-angle values are sorted before summing so the average is exactly
    // invariant under angle permutations (90-degree grid rotations).
    GlcmFeatures out;
    std::vector<double> vals(na);
    for (auto member : kMembers) {
        for (std::size_t a = 0; a < na; ++a) vals[a] = per[a].*member;
        std::sort(vals.begin(), vals.end());
        double s = 0;
        for (double v : vals) s += v;
        out.*member = s / double(na);
    }
    return out;
}

SizeZoneMatrix build_glszm(const ImageGrid& image, const BinaryMask& mask,
                           const DiscretizationConfig& cfg) {
    int L = 0;
    std::int64_t np = 0;
    std::vector<int> levels = level_grid(image, mask, cfg, &L, &np);
    const int w = mask.geom.width, h = mask.geom.height;

    // Union-find over in-mask pixels with equal discretized level.
    std::vector<std::int32_t> parent(levels.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::int32_t(std::int32_t)> find = [&](std::int32_t x) {
        while (parent[std::size_t(x)] != x) {
            parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
            x = parent[std::size_t(x)];
        }
        return x;
    };
    auto unite = [&](std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::size_t(std::max(a, b))] = std::min(a, b);
    };

    static const int dr[] = {0, 1, 1, 1};
    static const int dc[] = {1, -1, 0, 1};
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            int li = levels[std::size_t(r) * w + c];
            if (li == 0) continue;
            for (int k = 0; k < 4; ++k) {
                int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                if (levels[std::size_t(rr) * w + cc] == li)
                    unite(std::int32_t(std::size_t(r) * w + c), std::int32_t(std::size_t(rr) * w + cc));
            }
        }

    std::map<std::int32_t, std::int64_t> zone_size;
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] != 0) ++zone_size[find(std::int32_t(i))];

    std::map<std::pair<int, std::int64_t>, double> cells;
    std::int64_t max_size = 0;
    for (const auto& [root, size] : zone_size) {
        int level = levels[std::size_t(root)];
        cells[{level, size}] += 1.0;
        max_size = std::max(max_size, size);
    }

    SizeZoneMatrix out;
    out.n_levels = L;
    out.n_pixels = np;
    out.max_zone_size = max_size;
    for (const auto& [key, count] : cells) {
        out.entries.push_back({key.first, key.second, count});
        out.n_zones += count;
    }
    return out;
}

GlszmFeatures glszm_features(const SizeZoneMatrix& szm) {
    if (!(szm.n_zones >= 1)) throw std::invalid_argument("glszm_features: no zones");
    const double nz = szm.n_zones;

    GlszmFeatures f;
    std::map<int, double> row_sum;
    std::map<std::int64_t, double> col_sum;
    double mu_i = 0, mu_j = 0;
    for (const auto& e : szm.entries) {
        double i = double(e.level), j = double(e.size);
        double c = e.count, pr = c / nz;
        row_sum[e.level] += c;
        col_sum[e.size] += c;
        mu_i += pr * i;
        mu_j += pr * j;
        f.small_area_emphasis += c / (j * j);
        f.large_area_emphasis += c * j * j;
        f.low_gray_level_zone_emphasis += c / (i * i);
        f.high_gray_level_zone_emphasis += c * i * i;
        f.small_area_low_gray_level_emphasis += c / (i * i * j * j);
        f.small_area_high_gray_level_emphasis += c * i * i / (j * j);
        f.large_area_low_gray_level_emphasis += c * j * j / (i * i);
        f.large_area_high_gray_level_emphasis += c * i * i * j * j;
        f.zone_entropy -= pr * std::log2(pr);
    }
    for (const auto& [level, s] : row_sum) f.gray_level_non_uniformity += s * s;
    for (const auto& [size, s] : col_sum) f.size_zone_non_uniformity += s * s;

    f.small_area_emphasis /= nz;
    f.large_area_emphasis /= nz;
    f.low_gray_level_zone_emphasis /= nz;
    f.high_gray_level_zone_emphasis /= nz;
    f.small_area_low_gray_level_emphasis /= nz;
    f.small_area_high_gray_level_emphasis /= nz;
    f.large_area_low_gray_level_emphasis /= nz;
    f.large_area_high_gray_level_emphasis /= nz;
    f.gray_level_non_uniformity_normalized = f.gray_level_non_uniformity / (nz * nz);
    f.gray_level_non_uniformity /= nz;
    f.size_zone_non_uniformity_normalized = f.size_zone_non_uniformity / (nz * nz);
    f.size_zone_non_uniformity /= nz;
    f.zone_percentage = nz / double(szm.n_pixels);

    for (const auto& e : szm.entries) {
        double pr = e.count / nz;
        f.gray_level_variance += pr * (double(e.level) - mu_i) * (double(e.level) - mu_i);
        f.zone_variance += pr * (double(e.size) - mu_j) * (double(e.size) - mu_j);
    }
    return f;
}

}  // namespace radsynth
