#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radsynth/features.hpp"

namespace radsynth {

double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct Correlation {
    double statistic = 0;  // r or rho
    double p = 1;          // two-sided
};

// Two-sided p from t = r*sqrt((n-2)/(1-r^2)) against Student t with n-2 dof.
Correlation pearson(std::span<const double> u, std::span<const double> v);

// Pearson of average ranks; ties get the mean rank of their run.
Correlation spearman(std::span<const double> u, std::span<const double> v);

std::vector<double> average_ranks(std::span<const double> v);

// Seeded permutation p-value for Spearman (two-sided).
double spearman_permutation_p(std::span<const double> u, std::span<const double> v,
                              int permutations, std::uint64_t seed);

double regularized_incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, double dof);
double log_gamma(double x);

enum class Pairing { flattened, per_feature };

struct SimilarityCell {
    std::string roi;
    Family family;
    double cosine = 0;
    double pearson_r = 0, pearson_p = 1;
    double spearman_rho = 0, spearman_p = 1;
    long n = 0;
};

struct SimilarityReport {
    std::vector<SimilarityCell> cells;  // roi-major, family order
    Pairing pairing = Pairing::flattened;
    long n_subjects = 0;
};

// Standardizes both cohorts against the real cohort's column statistics,
// then correlates per (roi, family) cell. flattened pairs every
// subject x feature standardized value; per_feature averages per-column
// statistics across the family (p then comes from the averaged statistic).
// permutations > 0 swaps the flattened Spearman p for a seeded exact
// permutation estimate.
SimilarityReport family_report(const CohortMatrix& real, const CohortMatrix& synth,
                               Pairing pairing = Pairing::flattened, int permutations = 0,
                               std::uint64_t permutation_seed = 0x5eed);

void write_report_csv(const SimilarityReport& report, const std::string& path);

// Aligned text table, ROI x family columns, '*' marks p < 0.0001.
std::string render_report_table(const SimilarityReport& report);

}  // namespace radsynth
