#include "radsynth_ref.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <stdexcept>

namespace radsynth::ref {

namespace {

double pct(std::vector<double> sorted, double q) {
    double r = q * double(sorted.size() - 1);
    std::size_t lo = std::size_t(std::floor(r));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (r - double(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<int> bins_of(const std::vector<double>& values, const DiscretizationConfig& cfg,
                         int* n_levels) {
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    std::vector<int> bins(values.size(), 1);
    if (lo == hi) {
        *n_levels = 1;
        return bins;
    }
    double width = cfg.mode == DiscretizationConfig::Mode::fixed_bin_width
                       ? cfg.bin_width
                       : (hi - lo) / cfg.bin_count;
    int top = 1;
    for (std::size_t i = 0; i < values.size(); ++i) {
        int b = int(std::floor((values[i] - lo) / width)) + 1;
        if (cfg.mode == DiscretizationConfig::Mode::fixed_bin_count)
            b = std::min(b, cfg.bin_count);
        bins[i] = b;
        top = std::max(top, b);
    }
    *n_levels = top;
    return bins;
}

}  // namespace

FirstOrderFeatures first_order_reference(const std::vector<double>& values, double pixel_area,
                                         const DiscretizationConfig& cfg) {
    const std::size_t n = values.size();
    if (n == 0) throw std::invalid_argument("first_order_reference: empty input");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());

    FirstOrderFeatures f;
    f.minimum = sorted.front();
    f.maximum = sorted.back();
    f.range = f.maximum - f.minimum;
    f.p10 = pct(sorted, 0.10);
    f.p90 = pct(sorted, 0.90);
    f.median = pct(sorted, 0.50);
    f.interquartile_range = pct(sorted, 0.75) - pct(sorted, 0.25);

    double sum = 0, sum2 = 0;
    for (double v : values) {
        sum += v;
        sum2 += v * v;
    }
    f.mean = sum / double(n);
    f.energy = sum2;
    f.total_energy = pixel_area * sum2;
    f.root_mean_squared = std::sqrt(sum2 / double(n));

    double m2 = 0, m3 = 0, m4 = 0, mad = 0;
    for (double v : values) {
        double d = v - f.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
        mad += std::fabs(d);
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);
    f.variance = m2;
    f.mean_absolute_deviation = mad / double(n);
    f.skewness = m2 > 0 ? m3 / std::sqrt(m2 * m2 * m2) : 0.0;
    f.kurtosis = m2 > 0 ? m4 / (m2 * m2) : 0.0;

    std::vector<double> robust;
    for (double v : values)
        if (v >= f.p10 && v <= f.p90) robust.push_back(v);
    if (!robust.empty()) {
        double rmean = 0;
        for (double v : robust) rmean += v;
        rmean /= double(robust.size());
        double rmad = 0;
        for (double v : robust) rmad += std::fabs(v - rmean);
        f.robust_mean_absolute_deviation = rmad / double(robust.size());
    }

    int levels = 0;
    std::vector<int> bins = bins_of(values, cfg, &levels);
    std::map<int, std::int64_t> hist;
    for (int b : bins) ++hist[b];
    for (const auto& [bin, count] : hist) {
        double p = double(count) / double(n);
        f.entropy -= p * std::log2(p);
        f.uniformity += p * p;
    }
    return f;
}

std::vector<double> glcm_matrix_reference(const ImageGrid& image, const BinaryMask& mask,
                                          const DiscretizationConfig& cfg,
                                          std::array<int, 2> offset, int* n_levels) {
    const int w = image.geom.width, h = image.geom.height;
    std::vector<double> roi_vals;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (mask.at(r, c)) roi_vals.push_back(image.at(r, c));
    if (roi_vals.empty()) throw std::invalid_argument("glcm_matrix_reference: empty mask");
    int L = 0;
    std::vector<int> bins = bins_of(roi_vals, cfg, &L);
    *n_levels = L;

    std::vector<std::vector<int>> lv(std::size_t(h), std::vector<int>(std::size_t(w), 0));
    std::size_t k = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (mask.at(r, c)) lv[std::size_t(r)][std::size_t(c)] = bins[k++];

    std::vector<double> counts(std::size_t(L) * L, 0.0);
    double total = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (lv[std::size_t(r)][std::size_t(c)] == 0) continue;
            // ordered pair in both directions = symmetric matrix
            for (int sign = -1; sign <= 1; sign += 2) {
                int rr = r + sign * offset[0], cc = c + sign * offset[1];
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                if (lv[std::size_t(rr)][std::size_t(cc)] == 0) continue;
                int i = lv[std::size_t(r)][std::size_t(c)] - 1;
                int j = lv[std::size_t(rr)][std::size_t(cc)] - 1;
                counts[std::size_t(i) * L + j] += 1.0;
                total += 1.0;
            }
        }
    if (total == 0) return {};
    for (double& v : counts) v /= total;
    return counts;
}

namespace {

// Householder tridiagonalization (values only) + implicit QL. Independent of
// the engine's Jacobi solver.
void tridiagonalize(std::vector<double>& a, int n, std::vector<double>& d, std::vector<double>& e) {
    d.assign(std::size_t(n), 0.0);
    e.assign(std::size_t(n), 0.0);
    for (int i = n - 1; i >= 1; --i) {
        int l = i - 1;
        double h = 0, scale = 0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::fabs(a[std::size_t(i) * n + k]);
            if (scale == 0) {
                e[std::size_t(i)] = a[std::size_t(i) * n + l];
            } else {
                for (int k = 0; k <= l; ++k) {
                    a[std::size_t(i) * n + k] /= scale;
                    h += a[std::size_t(i) * n + k] * a[std::size_t(i) * n + k];
                }
                double f = a[std::size_t(i) * n + l];
                double g = f >= 0 ? -std::sqrt(h) : std::sqrt(h);
                e[std::size_t(i)] = scale * g;
                h -= f * g;
                a[std::size_t(i) * n + l] = f - g;
                f = 0;
                for (int j = 0; j <= l; ++j) {
                    g = 0;
                    for (int k = 0; k <= j; ++k) g += a[std::size_t(j) * n + k] * a[std::size_t(i) * n + k];
                    for (int k = j + 1; k <= l; ++k)
                        g += a[std::size_t(k) * n + j] * a[std::size_t(i) * n + k];
                    e[std::size_t(j)] = g / h;
                    f += e[std::size_t(j)] * a[std::size_t(i) * n + j];
                }
                double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a[std::size_t(i) * n + j];
                    e[std::size_t(j)] = g = e[std::size_t(j)] - hh * f;
                    for (int k = 0; k <= j; ++k)
                        a[std::size_t(j) * n + k] -= f * e[std::size_t(k)] + g * a[std::size_t(i) * n + k];
                }
            }
        } else {
            e[std::size_t(i)] = a[std::size_t(i) * n + l];
        }
        d[std::size_t(i)] = h;
    }
    for (int i = 0; i < n; ++i) d[std::size_t(i)] = a[std::size_t(i) * n + i];
    for (int i = 1; i < n; ++i) e[std::size_t(i - 1)] = e[std::size_t(i)];
    e[std::size_t(n - 1)] = 0;
}

void ql_implicit(std::vector<double>& d, std::vector<double>& e, int n) {
    auto sign2 = [](double a, double b) { return b >= 0 ? std::fabs(a) : -std::fabs(a); };
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::fabs(d[std::size_t(m)]) + std::fabs(d[std::size_t(m + 1)]);
                if (std::fabs(e[std::size_t(m)]) <= 1e-300 + 1e-15 * dd) break;
            }
            if (m != l) {
                if (++iter == 60) throw std::runtime_error("ql_implicit: too many iterations");
                double g = (d[std::size_t(l + 1)] - d[std::size_t(l)]) / (2 * e[std::size_t(l)]);
                double r = std::hypot(g, 1.0);
                g = d[std::size_t(m)] - d[std::size_t(l)] + e[std::size_t(l)] / (g + sign2(r, g));
                double s = 1, c = 1, p = 0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[std::size_t(i)], b = c * e[std::size_t(i)];
                    r = std::hypot(f, g);
                    e[std::size_t(i + 1)] = r;
                    if (r == 0) {
                        d[std::size_t(i + 1)] -= p;
                        e[std::size_t(m)] = 0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[std::size_t(i + 1)] - p;
                    r = (d[std::size_t(i)] - g) * s + 2 * c * b;
                    p = s * r;
                    d[std::size_t(i + 1)] = g + p;
                    g = c * r - b;
                }
                if (underflow) continue;
                d[std::size_t(l)] -= p;
                e[std::size_t(l)] = g;
                e[std::size_t(m)] = 0;
            }
        } while (m != l);
    }
}

std::vector<double> symmetric_eigenvalues_desc(std::vector<double> a, int n) {
    std::vector<double> d, e;
    tridiagonalize(a, n, d, e);
    ql_implicit(d, e, n);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

double row_sum(const std::vector<double>& p, int L, int i) {
    double s = 0;
    for (int j = 0; j < L; ++j) s += p[std::size_t(i) * L + j];
    return s;
}

}  // namespace

GlcmFeatures glcm_features_reference(const std::vector<double>& p, int L) {
    GlcmFeatures f;
    auto P = [&](int i, int j) { return p[std::size_t(i) * L + j]; };

    std::vector<double> px(static_cast<std::size_t>(L));
    for (int i = 0; i < L; ++i) px[std::size_t(i)] = row_sum(p, L, i);
    int present = 0;
    for (int i = 0; i < L; ++i)
        if (px[std::size_t(i)] > 0) ++present;

    double mux = 0, muy = 0;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            mux += (i + 1) * P(i, j);
            muy += (j + 1) * P(i, j);
        }
    double sx2 = 0, sy2 = 0;
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            sx2 += (i + 1 - mux) * (i + 1 - mux) * P(i, j);
            sy2 += (j + 1 - muy) * (j + 1 - muy) * P(i, j);
        }

    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) f.autocorrelation += (i + 1) * (j + 1) * P(i, j);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) f.joint_average += (i + 1) * P(i, j);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            double u = (i + 1) + (j + 1) - mux - muy;
            f.cluster_prominence += u * u * u * u * P(i, j);
            f.cluster_shade += u * u * u * P(i, j);
            f.cluster_tendency += u * u * P(i, j);
        }
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) f.contrast += (i - j) * (i - j) * P(i, j);

    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            f.joint_energy += P(i, j) * P(i, j);
            if (P(i, j) > 0) f.joint_entropy -= P(i, j) * std::log2(P(i, j));
            f.id += P(i, j) / (1 + std::fabs(double(i - j)));
            f.idm += P(i, j) / (1 + double(i - j) * (i - j));
            f.idn += P(i, j) / (1 + std::fabs(double(i - j)) / L);
            f.idmn += P(i, j) / (1 + double(i - j) * (i - j) / double(L) / double(L));
            if (i != j) f.inverse_variance += P(i, j) / double(i - j) / double(i - j);
            f.maximum_probability = std::max(f.maximum_probability, P(i, j));
            f.sum_squares += (i + 1 - mux) * (i + 1 - mux) * P(i, j);
        }

    std::vector<double> psum(std::size_t(2 * L + 1), 0.0), pdiff(std::size_t(L), 0.0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            psum[std::size_t(i + j + 2)] += P(i, j);
            pdiff[std::size_t(std::abs(i - j))] += P(i, j);
        }
    for (int s = 2; s <= 2 * L; ++s) {
        if (psum[std::size_t(s)] > 0) {
            f.sum_average += s * psum[std::size_t(s)];
            f.sum_entropy -= psum[std::size_t(s)] * std::log2(psum[std::size_t(s)]);
        }
    }
    double da = 0;
    for (int s = 0; s < L; ++s) da += s * pdiff[std::size_t(s)];
    f.difference_average = da;
    for (int s = 0; s < L; ++s) {
        if (pdiff[std::size_t(s)] > 0)
            f.difference_entropy -= pdiff[std::size_t(s)] * std::log2(pdiff[std::size_t(s)]);
        f.difference_variance += (s - da) * (s - da) * pdiff[std::size_t(s)];
    }

    if (present <= 1 || sx2 <= 0 || sy2 <= 0) {
        f.correlation = 1;
        f.imc1 = 0;
        f.imc2 = 0;
    } else {
        double num = 0;
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) num += (i + 1 - mux) * (j + 1 - muy) * P(i, j);
        f.correlation = num / std::sqrt(sx2 * sy2);

        double hx = 0, hxy = f.joint_entropy, hxy1 = 0, hxy2 = 0;
        for (int i = 0; i < L; ++i)
            if (px[std::size_t(i)] > 0) hx -= px[std::size_t(i)] * std::log2(px[std::size_t(i)]);
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                double prod = px[std::size_t(i)] * px[std::size_t(j)];
                if (prod > 0) {
                    if (P(i, j) > 0) hxy1 -= P(i, j) * std::log2(prod);
                    hxy2 -= prod * std::log2(prod);
                }
            }
        f.imc1 = hx > 0 ? (hxy - hxy1) / hx : 0;
        double arg = 1 - std::exp(-2 * (hxy2 - hxy));
        f.imc2 = arg > 0 ? std::sqrt(arg) : 0;
    }

    if (present <= 1) {
        f.mcc = 1;
    } else {
        std::vector<int> lv;
        for (int i = 0; i < L; ++i)
            if (px[std::size_t(i)] > 0) lv.push_back(i);
        int m = int(lv.size());
        std::vector<double> s(std::size_t(m) * m, 0.0);
        for (int ii = 0; ii < m; ++ii)
            for (int jj = 0; jj < m; ++jj) {
                double b = 0;
                for (int kk = 0; kk < m; ++kk)
                    b += P(lv[std::size_t(ii)], lv[std::size_t(kk)]) *
                         P(lv[std::size_t(jj)], lv[std::size_t(kk)]) / px[std::size_t(lv[std::size_t(kk)])];
                s[std::size_t(ii) * m + jj] =
                    b / std::sqrt(px[std::size_t(lv[std::size_t(ii)])] * px[std::size_t(lv[std::size_t(jj)])]);
            }
        std::vector<double> ev = symmetric_eigenvalues_desc(std::move(s), m);
        f.mcc = std::sqrt(std::max(0.0, ev[1]));
    }
    return f;
}

GlcmFeatures glcm_features_averaged_reference(const ImageGrid& image, const BinaryMask& mask,
                                              const DiscretizationConfig& cfg) {
    static const std::array<std::array<int, 2>, 4> offsets{{{0, 1}, {1, 1}, {1, 0}, {1, -1}}};
    std::vector<GlcmFeatures> per;
    int L = 0;
    for (const auto& off : offsets) {
        std::vector<double> m = glcm_matrix_reference(image, mask, cfg, off, &L);
        if (!m.empty()) per.push_back(glcm_features_reference(m, L));
    }
    if (per.empty()) throw std::invalid_argument("glcm reference: no valid pairs");

    auto avg = [&](double GlcmFeatures::*member) {
        std::vector<double> vals;
        for (const auto& g : per) vals.push_back(g.*member);
        std::sort(vals.begin(), vals.end());
        double s = 0;
        for (double v : vals) s += v;
        return s / double(vals.size());
    };
    GlcmFeatures out;
    out.autocorrelation = avg(&GlcmFeatures::autocorrelation);
    out.cluster_prominence = avg(&GlcmFeatures::cluster_prominence);
    out.cluster_shade = avg(&GlcmFeatures::cluster_shade);
    out.cluster_tendency = avg(&GlcmFeatures::cluster_tendency);
    out.contrast = avg(&GlcmFeatures::contrast);
    out.correlation = avg(&GlcmFeatures::correlation);
    out.difference_average = avg(&GlcmFeatures::difference_average);
    out.difference_entropy = avg(&GlcmFeatures::difference_entropy);
    out.difference_variance = avg(&GlcmFeatures::difference_variance);
    out.id = avg(&GlcmFeatures::id);
    out.idm = avg(&GlcmFeatures::idm);
    out.idmn = avg(&GlcmFeatures::idmn);
    out.idn = avg(&GlcmFeatures::idn);
    out.imc1 = avg(&GlcmFeatures::imc1);
    out.imc2 = avg(&GlcmFeatures::imc2);
    out.inverse_variance = avg(&GlcmFeatures::inverse_variance);
    out.joint_average = avg(&GlcmFeatures::joint_average);
    out.joint_energy = avg(&GlcmFeatures::joint_energy);
    out.joint_entropy = avg(&GlcmFeatures::joint_entropy);
    out.maximum_probability = avg(&GlcmFeatures::maximum_probability);
    out.mcc = avg(&GlcmFeatures::mcc);
    out.sum_average = avg(&GlcmFeatures::sum_average);
    out.sum_entropy = avg(&GlcmFeatures::sum_entropy);
    out.sum_squares = avg(&GlcmFeatures::sum_squares);
    return out;
}

SizeZoneMatrix glszm_reference(const ImageGrid& image, const BinaryMask& mask,
                               const DiscretizationConfig& cfg) {
    const int w = image.geom.width, h = image.geom.height;
    std::vector<double> roi_vals;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (mask.at(r, c)) roi_vals.push_back(image.at(r, c));
    if (roi_vals.empty()) throw std::invalid_argument("glszm_reference: empty mask");
    int L = 0;
    std::vector<int> bins = bins_of(roi_vals, cfg, &L);

    std::vector<int> lv(std::size_t(w) * h, 0);
    std::size_t k = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (mask.at(r, c)) lv[std::size_t(r) * w + c] = bins[k++];

    std::vector<std::uint8_t> seen(lv.size(), 0);
    std::map<std::pair<int, std::int64_t>, double> cells;
    std::int64_t max_size = 0;
    double zones = 0;
    for (std::size_t start = 0; start < lv.size(); ++start) {
        if (lv[start] == 0 || seen[start]) continue;
        int level = lv[start];
        std::int64_t size = 0;
        std::deque<std::size_t> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            std::size_t p = queue.front();
            queue.pop_front();
            ++size;
            int r = int(p / std::size_t(w)), c = int(p % std::size_t(w));
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    std::size_t q = std::size_t(rr) * w + cc;
                    if (!seen[q] && lv[q] == level) {
                        seen[q] = 1;
                        queue.push_back(q);
                    }
                }
        }
        cells[{level, size}] += 1;
        zones += 1;
        max_size = std::max(max_size, size);
    }

    SizeZoneMatrix out;
    out.n_levels = L;
    out.n_pixels = std::int64_t(roi_vals.size());
    out.max_zone_size = max_size;
    out.n_zones = zones;
    for (const auto& [key, count] : cells) out.entries.push_back({key.first, key.second, count});
    return out;
}

GlszmFeatures glszm_features_reference(const SizeZoneMatrix& szm) {
    GlszmFeatures f;
    const double nz = szm.n_zones;
    auto each = [&](auto&& fn) {
        for (const auto& e : szm.entries) fn(double(e.level), double(e.size), e.count);
    };

    each([&](double i, double j, double c) { f.small_area_emphasis += c / (j * j) / nz; });
    each([&](double i, double j, double c) { f.large_area_emphasis += c * j * j / nz; });
    each([&](double i, double j, double c) { f.low_gray_level_zone_emphasis += c / (i * i) / nz; });
    each([&](double i, double j, double c) { f.high_gray_level_zone_emphasis += c * i * i / nz; });
    each([&](double i, double j, double c) {
        f.small_area_low_gray_level_emphasis += c / (i * i * j * j) / nz;
    });
    each([&](double i, double j, double c) {
        f.small_area_high_gray_level_emphasis += c * i * i / (j * j) / nz;
    });
    each([&](double i, double j, double c) {
        f.large_area_low_gray_level_emphasis += c * j * j / (i * i) / nz;
    });
    each([&](double i, double j, double c) {
        f.large_area_high_gray_level_emphasis += c * i * i * j * j / nz;
    });

    std::map<int, double> rows;
    std::map<std::int64_t, double> cols;
    for (const auto& e : szm.entries) {
        rows[e.level] += e.count;
        cols[e.size] += e.count;
    }
    for (const auto& [lvl, s] : rows) f.gray_level_non_uniformity += s * s / nz;
    for (const auto& [sz, s] : cols) f.size_zone_non_uniformity += s * s / nz;
    f.gray_level_non_uniformity_normalized = f.gray_level_non_uniformity / nz;
    f.size_zone_non_uniformity_normalized = f.size_zone_non_uniformity / nz;
    f.zone_percentage = nz / double(szm.n_pixels);

    double mi = 0, mj = 0;
    each([&](double i, double j, double c) {
        mi += i * c / nz;
        mj += j * c / nz;
    });
    each([&](double i, double j, double c) {
        f.gray_level_variance += (i - mi) * (i - mi) * c / nz;
        f.zone_variance += (j - mj) * (j - mj) * c / nz;
    });
    each([&](double i, double j, double c) {
        double p = c / nz;
        f.zone_entropy -= p * std::log2(p);
    });
    return f;
}

ImageGrid sor_fill_serial(const ImageGrid& image, const BinaryMask& mask, const SorOptions& opts) {
    const int w = image.geom.width, h = image.geom.height;
    if (mask.pixel_count() == 0) throw std::invalid_argument("sor_fill_serial: empty mask");
    if (mask.pixel_count() == image.geom.pixel_total())
        throw std::invalid_argument("sor_fill_serial: mask covers the entire image");

    double ring_sum = 0;
    std::int64_t ring_n = 0;
    double out_min = 0, out_max = 0;
    bool have = false;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (mask.at(r, c)) continue;
            double v = image.at(r, c);
            if (!have) {
                out_min = out_max = v;
                have = true;
            }
            out_min = std::min(out_min, v);
            out_max = std::max(out_max, v);
            bool near = false;
            for (int dr = -2; dr <= 2 && !near; ++dr)
                for (int dc = -2; dc <= 2 && !near; ++dc) {
                    int rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < h && cc >= 0 && cc < w && mask.at(rr, cc)) near = true;
                }
            if (near) {
                ring_sum += v;
                ++ring_n;
            }
        }
    const double tol = opts.tol_rel * (out_max - out_min);

    ImageGrid u = image;
    const double init = ring_sum / double(ring_n);
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        if (mask.bits[i]) u.values[i] = init;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double res = 0;
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                if (!mask.at(r, c)) continue;
                double s = 0;
                int cnt = 0;
                if (r > 0) { s += u.at(r - 1, c); ++cnt; }
                if (r < h - 1) { s += u.at(r + 1, c); ++cnt; }
                if (c > 0) { s += u.at(r, c - 1); ++cnt; }
                if (c < w - 1) { s += u.at(r, c + 1); ++cnt; }
                u.at(r, c) += opts.omega * (s / cnt - u.at(r, c));
            }
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                if (!mask.at(r, c)) continue;
                double s = 0;
                int cnt = 0;
                if (r > 0) { s += u.at(r - 1, c); ++cnt; }
                if (r < h - 1) { s += u.at(r + 1, c); ++cnt; }
                if (c > 0) { s += u.at(r, c - 1); ++cnt; }
                if (c < w - 1) { s += u.at(r, c + 1); ++cnt; }
                res = std::max(res, std::fabs(cnt * u.at(r, c) - s));
            }
        if (res <= tol) break;
    }
    return u;
}

double student_t_two_sided_p_quadrature(double t, double dof) {
    auto density = [dof](double s) { return std::pow(1 + s * s / dof, -(dof + 1) / 2); };

    // Map [base, inf) onto [0,1) with s = base + x/(1-x).
    std::function<double(double, double, double, double, double, double, int)> simpson =
        [&](double base, double a, double b, double fa, double fb, double fm, int depth) -> double {
        double m = (a + b) / 2;
        double lm = (a + m) / 2, rm = (m + b) / 2;
        auto eval = [&](double x) {
            double om = 1 - x;
            if (om <= 0) return 0.0;
            double s = base + x / om;
            return density(s) / (om * om);
        };
        double flm = eval(lm), frm = eval(rm);
        double whole = (b - a) / 6 * (fa + 4 * fm + fb);
        double left = (m - a) / 6 * (fa + 4 * flm + fm);
        double right = (b - m) / 6 * (fm + 4 * frm + fb);
        if (depth > 40 || std::fabs(left + right - whole) < 1e-13 * (1 + std::fabs(whole)))
            return left + right + (left + right - whole) / 15;
        return simpson(base, a, m, fa, fm, flm, depth + 1) +
               simpson(base, m, b, fm, fb, frm, depth + 1);
    };
    auto tail = [&](double base) {
        auto eval = [&](double x) {
            double om = 1 - x;
            if (om <= 0) return 0.0;
            double s = base + x / om;
            return density(s) / (om * om);
        };
        return simpson(base, 0.0, 1.0, eval(0.0), 0.0, eval(0.5), 0);
    };

    double upper = tail(std::fabs(t));
    double half = tail(0.0);
    return std::min(1.0, upper / half);
}

double spearman_reference(const std::vector<double>& u, const std::vector<double>& v) {
    const std::size_t n = u.size();
    auto ranks = [n](const std::vector<double>& x) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            double below = 0, equal = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (x[j] < x[i]) ++below;
                if (x[j] == x[i]) ++equal;
            }
            r[i] = below + (equal - 1) / 2.0 + 1.0;
        }
        return r;
    };
    std::vector<double> ru = ranks(u), rv = ranks(v);
    double mu = 0, mv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mu += ru[i];
        mv += rv[i];
    }
    mu /= double(n);
    mv /= double(n);
    double suu = 0, svv = 0, suv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        suu += (ru[i] - mu) * (ru[i] - mu);
        svv += (rv[i] - mv) * (rv[i] - mv);
        suv += (ru[i] - mu) * (rv[i] - mv);
    }
    return suv / std::sqrt(suu * svv);
}

}  // namespace radsynth::ref
