#include "radsynth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "radsynth/rng.hpp"

namespace radsynth {

// Lanczos approximation (g=7). Kept local instead of std::lgamma so results
// do not depend on the libm build and calls are thread-safe.
double log_gamma(double x) {
    static const double c[9] = {0.99999999999980993,     676.5203681218851,
                                -1259.1392167224028,     771.32342877765313,
                                -176.61502916214059,     12.507343278686905,
                                -0.13857109526572012,    9.9843695780195716e-6,
                                1.5056327351493116e-7};
    if (x < 0.5) return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1 - x);
    x -= 1;
    double a = c[0];
    double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
    return 0.5 * std::log(2 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

static double beta_continued_fraction(double a, double b, double x) {
    const int kMaxIter = 300;
    const double kEps = 1e-15, kTiny = 1e-300;
    double qab = a + b, qap = a + 1, qam = a - 1;
    double c = 1, d = 1 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0))
        throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
    if (x <= 0) return 0;
    if (x >= 1) return 1;
    double bt = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                         b * std::log1p(-x));
    if (x < (a + 1) / (a + b + 2)) return bt * beta_continued_fraction(a, b, x) / a;
    return 1 - bt * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (!std::isfinite(t)) return 0;
    double x = dof / (dof + t * t);
    double p = regularized_incomplete_beta(dof / 2, 0.5, x);
    return std::min(1.0, std::max(0.0, p));
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine: length mismatch");
    if (u.empty()) throw std::invalid_argument("cosine: empty input");
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0 || vv == 0) throw std::invalid_argument("cosine: zero-norm input");
    return uv / (std::sqrt(uu) * std::sqrt(vv));
}

Correlation pearson(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = u.size();
    if (n < 3) throw std::invalid_argument("pearson: need n >= 3");
    double mu = 0, mv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= double(n);
    mv /= double(n);
    double suu = 0, svv = 0, suv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double du = u[i] - mu, dv = v[i] - mv;
        suu += du * du;
        svv += dv * dv;
        suv += du * dv;
    }
    if (suu <= 0 || svv <= 0) throw std::invalid_argument("pearson: constant input vector");
    double r = suv / (std::sqrt(suu) * std::sqrt(svv));
    r = std::min(1.0, std::max(-1.0, r));
    Correlation out;
    out.statistic = r;
    double one_minus_r2 = (1 - r) * (1 + r);
    if (one_minus_r2 <= 0) {
        out.p = 0;
    } else {
        double t = r * std::sqrt(double(n - 2) / one_minus_r2);
        out.p = student_t_two_sided_p(t, double(n - 2));
    }
    return out;
}

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = (double(i) + double(j)) / 2.0 + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

Correlation spearman(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("spearman: length mismatch");
    if (u.size() < 3) throw std::invalid_argument("spearman: need n >= 3");
    std::vector<double> ru = average_ranks(u), rv = average_ranks(v);
    auto has_variance = [](const std::vector<double>& r) {
        for (double x : r)
            if (x != r[0]) return true;
        return false;
    };
    if (!has_variance(ru) || !has_variance(rv))
        throw std::invalid_argument("spearman: all-tied input (zero rank variance)");
    return pearson(ru, rv);
}

double spearman_permutation_p(std::span<const double> u, std::span<const double> v,
                              int permutations, std::uint64_t seed) {
    if (permutations < 1) throw std::invalid_argument("spearman_permutation_p: need >= 1 permutation");
    double observed = std::fabs(spearman(u, v).statistic);
    std::vector<double> shuffled(v.begin(), v.end());
    Rng rng(seed);
    long hits = 0;
    for (int t = 0; t < permutations; ++t) {
        for (std::size_t i = shuffled.size() - 1; i > 0; --i) {
            std::size_t j = std::size_t(rng.next_u64() % (i + 1));
            std::swap(shuffled[i], shuffled[j]);
        }
        double rho = std::fabs(spearman(u, shuffled).statistic);
        if (rho >= observed - 1e-12) ++hits;
    }
    return double(hits + 1) / double(permutations + 1);
}

namespace {

std::vector<std::string> roi_order_of(const std::vector<FeatureKey>& columns) {
    std::vector<std::string> rois;
    for (const auto& k : columns)
        if (std::find(rois.begin(), rois.end(), k.roi) == rois.end()) rois.push_back(k.roi);
    return rois;
}

}  // namespace

SimilarityReport family_report(const CohortMatrix& real, const CohortMatrix& synth,
                               Pairing pairing, int permutations, std::uint64_t permutation_seed) {
    if (real.columns != synth.columns)
        throw std::invalid_argument("family_report: cohort schemas differ");
    if (real.subjects != synth.subjects)
        throw std::invalid_argument("family_report: cohort subject ids differ");
    const std::size_t nsub = real.subjects.size();
    if (nsub < 3) throw std::invalid_argument("family_report: need at least 3 shared subjects");

    // Standardize both sides against the real cohort so synthetic bias stays
    // visible instead of being normalized away.
    const std::size_t nc = real.columns.size();
    std::vector<double> mean(nc, 0.0), sd(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        double m = 0;
        for (std::size_t r = 0; r < nsub; ++r) m += real.at(r, c);
        m /= double(nsub);
        double var = 0;
        for (std::size_t r = 0; r < nsub; ++r) {
            double d = real.at(r, c) - m;
            var += d * d;
        }
        mean[c] = m;
        sd[c] = std::sqrt(var / double(nsub));
    }
    CohortMatrix realz = standardize_against(real, mean, sd);
    CohortMatrix synthz = standardize_against(synth, mean, sd);

    SimilarityReport report;
    report.pairing = pairing;
    report.n_subjects = long(nsub);

    for (const auto& roi : roi_order_of(real.columns)) {
        for (Family fam : {Family::shape, Family::firstorder, Family::glcm, Family::glszm}) {
            std::vector<std::size_t> cols;
            for (std::size_t c = 0; c < nc; ++c)
                if (real.columns[c].roi == roi && real.columns[c].family == fam &&
                    !realz.zero_variance[c])
                    cols.push_back(c);
            if (cols.empty()) continue;

            SimilarityCell cell;
            cell.roi = roi;
            cell.family = fam;

            if (pairing == Pairing::flattened) {
                std::vector<double> u, v;
                u.reserve(nsub * cols.size());
                v.reserve(nsub * cols.size());
                for (std::size_t r = 0; r < nsub; ++r)
                    for (std::size_t c : cols) {
                        u.push_back(realz.at(r, c));
                        v.push_back(synthz.at(r, c));
                    }
                cell.n = long(u.size());
                cell.cosine = cosine_similarity(u, v);
                Correlation pe = pearson(u, v);
                cell.pearson_r = pe.statistic;
                cell.pearson_p = pe.p;
                Correlation sp = spearman(u, v);
                cell.spearman_rho = sp.statistic;
                cell.spearman_p = sp.p;
                if (permutations > 0)
                    cell.spearman_p = spearman_permutation_p(
                        u, v, permutations, hash_at(permutation_seed, report.cells.size()));
            } else {
                // Mean of per-feature statistics across the family; columns
                // that are constant on either side cannot be correlated and
                // are left out.
                double sum_cos = 0, sum_r = 0, sum_rho = 0;
                long used = 0;
                for (std::size_t c : cols) {
                    std::vector<double> u(nsub), v(nsub);
                    bool v_const = true;
                    for (std::size_t r = 0; r < nsub; ++r) {
                        u[r] = realz.at(r, c);
                        v[r] = synthz.at(r, c);
                        if (v[r] != v[0]) v_const = false;
                    }
                    if (v_const) continue;
                    sum_cos += cosine_similarity(u, v);
                    sum_r += pearson(u, v).statistic;
                    sum_rho += spearman(u, v).statistic;
                    ++used;
                }
                if (used == 0) continue;
                cell.n = long(nsub);
                cell.cosine = sum_cos / double(used);
                cell.pearson_r = sum_r / double(used);
                cell.spearman_rho = sum_rho / double(used);
                // p from the averaged statistic at n = subjects (heuristic,
                // recorded via the pairing field)
                double nm2 = double(nsub - 2);
                auto p_of = [&](double r) {
                    double om = (1 - r) * (1 + r);
                    if (om <= 0) return 0.0;
                    return student_t_two_sided_p(r * std::sqrt(nm2 / om), nm2);
                };
                cell.pearson_p = p_of(cell.pearson_r);
                cell.spearman_p = p_of(cell.spearman_rho);
            }
            report.cells.push_back(cell);
        }
    }
    if (report.cells.empty()) throw std::runtime_error("family_report: no usable feature columns");
    return report;
}

namespace {

std::string fmt_stat(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_report_csv(const SimilarityReport& report, const std::string& path) {
    std::ostringstream out;
    out << "roi,family,metric,value,p,n\n";
    for (const auto& cell : report.cells) {
        out << cell.roi << ',' << family_display_name(cell.family) << ",cosine,"
            << fmt_full(cell.cosine) << ",," << cell.n << '\n';
        out << cell.roi << ',' << family_display_name(cell.family) << ",pearson,"
            << fmt_full(cell.pearson_r) << ',' << fmt_full(cell.pearson_p) << ',' << cell.n << '\n';
        out << cell.roi << ',' << family_display_name(cell.family) << ",spearman,"
            << fmt_full(cell.spearman_rho) << ',' << fmt_full(cell.spearman_p) << ',' << cell.n
            << '\n';
    }
    write_file_atomic(path, out.str());
}

std::string render_report_table(const SimilarityReport& report) {
    std::vector<std::string> rois;
    for (const auto& cell : report.cells)
        if (std::find(rois.begin(), rois.end(), cell.roi) == rois.end()) rois.push_back(cell.roi);
    const Family fams[] = {Family::shape, Family::firstorder, Family::glcm, Family::glszm};

    auto find_cell = [&](const std::string& roi, Family fam) -> const SimilarityCell* {
        for (const auto& cell : report.cells)
            if (cell.roi == roi && cell.family == fam) return &cell;
        return nullptr;
    };

    const int label_w = 22, col_w = 11;
    std::ostringstream out;
    out << std::string(label_w, ' ');
    for (const auto& roi : rois) {
        std::string block = roi;
        int width = col_w * 4;
        int pad = (width - int(block.size())) / 2;
        out << std::string(std::size_t(std::max(0, pad)), ' ') << block
            << std::string(std::size_t(std::max(0, width - pad - int(block.size()))), ' ');
    }
    out << '\n' << std::string(label_w, ' ');
    for (std::size_t i = 0; i < rois.size(); ++i)
        for (Family fam : fams) {
            std::string name = family_display_name(fam);
            out << std::string(std::size_t(col_w - int(name.size())), ' ') << name;
        }
    out << '\n';

    struct Row {
        const char* label;
        double SimilarityCell::*value;
        double SimilarityCell::*p;  // null for cosine
    };
    const Row rows[] = {
        {"Cosine Similarity", &SimilarityCell::cosine, nullptr},
        {"Pearson Correlation", &SimilarityCell::pearson_r, &SimilarityCell::pearson_p},
        {"Spearman Correlation", &SimilarityCell::spearman_rho, &SimilarityCell::spearman_p},
    };
    for (const auto& row : rows) {
        out << row.label << std::string(std::size_t(label_w - int(std::string(row.label).size())), ' ');
        for (const auto& roi : rois)
            for (Family fam : fams) {
                const SimilarityCell* cell = find_cell(roi, fam);
                std::string txt = cell ? fmt_stat(cell->*(row.value)) : "-";
                if (cell && row.p && cell->*(row.p) < 0.0001) txt += "*";
                out << std::string(std::size_t(std::max(0, col_w - int(txt.size()))), ' ') << txt;
            }
        out << '\n';
    }
    return out.str();
}

}  // namespace radsynth
