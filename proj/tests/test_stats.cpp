#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "radsynth/rng.hpp"
#include "radsynth/stats.hpp"
#include "radsynth_ref.hpp"
#include "test_util.hpp"

using namespace radsynth;
using namespace testutil;

TEST_CASE("cosine basics") {
    std::vector<double> u = {1, 2, 3};
    CHECK(cosine_similarity(u, u) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> ex = {1, 0}, ey = {0, 1};
    CHECK(cosine_similarity(ex, ey) == doctest::Approx(0.0));
    std::vector<double> nu = {-1, -2, -3};
    CHECK(cosine_similarity(u, nu) == doctest::Approx(-1.0).epsilon(1e-15));
    std::vector<double> zero = {0, 0, 0};
    CHECK_THROWS(cosine_similarity(u, zero));
    CHECK_THROWS(cosine_similarity(u, ex));  // length mismatch
}

TEST_CASE("pearson affine dependence") {
    std::vector<double> u, v;
    for (int i = 0; i < 10; ++i) {
        u.push_back(i * 1.7 - 3);
        v.push_back(2 * u.back() + 3);
    }
    Correlation c = pearson(u, v);
    CHECK(c.statistic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.p == 0.0);

    for (double& x : v) x = -x;
    c = pearson(u, v);
    CHECK(c.statistic == doctest::Approx(-1.0).epsilon(1e-12));

    std::vector<double> constant(10, 4.0);
    CHECK_THROWS(pearson(u, constant));
    std::vector<double> two = {1, 2};
    CHECK_THROWS(pearson(two, two));
}

TEST_CASE("pearson is invariant under positive affine maps") {
    Rng rng(13);
    std::vector<double> u, v;
    for (int i = 0; i < 40; ++i) {
        u.push_back(rng.uniform(-3, 3));
        v.push_back(rng.uniform(-3, 3));
    }
    double base = pearson(u, v).statistic;
    std::vector<double> mapped = u;
    for (double& x : mapped) x = 2.5 * x + 7;
    CHECK(pearson(mapped, v).statistic == doctest::Approx(base).epsilon(1e-12));
    for (double& x : mapped) x = -x;
    CHECK(pearson(mapped, v).statistic == doctest::Approx(-base).epsilon(1e-12));
}

TEST_CASE("t distribution p matches quadrature oracle") {
    for (double dof : {1.0, 3.0, 10.0, 28.0, 100.0, 998.0}) {
        for (double t : {0.0, 0.31, 0.5, 1.0, 2.2, 3.7, 6.0}) {
            double mine = student_t_two_sided_p(t, dof);
            double oracle = ref::student_t_two_sided_p_quadrature(t, dof);
            CHECK(std::fabs(mine - oracle) < 1e-8);
        }
    }
}

TEST_CASE("pearson p for moderate r matches the oracle") {
    // r = 0.5, n = 12 -> t = r*sqrt(10/0.75)
    double r = 0.5;
    int n = 12;
    double t = r * std::sqrt((n - 2) / (1 - r * r));
    double expect = ref::student_t_two_sided_p_quadrature(t, n - 2);
    CHECK(std::fabs(student_t_two_sided_p(t, n - 2) - expect) < 1e-8);
    CHECK(expect == doctest::Approx(0.0976).epsilon(0.01));
}

TEST_CASE("average ranks with ties") {
    std::vector<double> v = {10, 20, 20, 30};
    std::vector<double> r = average_ranks(v);
    CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
    std::vector<double> w = {5, 1, 1, 1, 9};
    CHECK(average_ranks(w) == std::vector<double>{4.0, 2.0, 2.0, 2.0, 5.0});
}

TEST_CASE("spearman is invariant under strictly monotone transforms") {
    Rng rng(14);
    std::vector<double> u, v;
    for (int i = 0; i < 30; ++i) {
        u.push_back(rng.uniform(-2, 2));
        v.push_back(rng.uniform(-2, 2));
    }
    double rho = spearman(u, v).statistic;
    std::vector<double> cubed = u;
    for (double& x : cubed) x = x * x * x;
    CHECK(spearman(cubed, v).statistic == doctest::Approx(rho).epsilon(1e-12));

    std::vector<double> up = u;
    std::sort(up.begin(), up.end());
    std::vector<double> cubed_up = up;
    for (double& x : cubed_up) x = x * x * x;
    CHECK(spearman(up, cubed_up).statistic == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> tied(10, 3.0);
    CHECK_THROWS(spearman(tied, u));
}

TEST_CASE("spearman matches the brute force ranking oracle") {
    Rng rng(15);
    for (int t = 0; t < 100; ++t) {
        int n = rng.uniform_int(4, 40);
        std::vector<double> u, v;
        for (int i = 0; i < n; ++i) {
            // quantized draws produce plenty of ties
            u.push_back(std::floor(rng.uniform(0, 8)));
            v.push_back(std::floor(rng.uniform(0, 8)));
        }
        bool u_const = std::all_of(u.begin(), u.end(), [&](double x) { return x == u[0]; });
        bool v_const = std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
        if (u_const || v_const) continue;
        double mine = spearman(u, v).statistic;
        double oracle = ref::spearman_reference(u, v);
        CHECK(close_rel(mine, oracle, 1e-12, 1e-12));
    }
}

TEST_CASE("null p values are uniform") {
    Rng rng(16);
    const int trials = 100, n = 1000;
    std::vector<double> u(n), v(n);
    std::vector<double> pvals;
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < n; ++i) u[std::size_t(i)] = rng.uniform(0, 1);
        v = u;
        for (std::size_t i = v.size() - 1; i > 0; --i)
            std::swap(v[i], v[std::size_t(rng.next_u64() % (i + 1))]);
        pvals.push_back(pearson(u, v).p);
    }
    std::sort(pvals.begin(), pvals.end());
    double ks = 0;
    for (std::size_t i = 0; i < pvals.size(); ++i) {
        double empirical_hi = double(i + 1) / double(trials);
        double empirical_lo = double(i) / double(trials);
        ks = std::max(ks, std::fabs(empirical_hi - pvals[i]));
        ks = std::max(ks, std::fabs(pvals[i] - empirical_lo));
    }
    CHECK(ks < 0.15);
}

TEST_CASE("permutation p approximates the t based p") {
    Rng rng(17);
    std::vector<double> u, v;
    for (int i = 0; i < 24; ++i) {
        double x = rng.uniform(-1, 1);
        u.push_back(x);
        v.push_back(x + rng.uniform(-1.5, 1.5));
    }
    Correlation sp = spearman(u, v);
    double perm = spearman_permutation_p(u, v, 800, 99);
    CHECK(std::fabs(perm - sp.p) < 0.08);
}

namespace {

CohortMatrix toy_cohort(int n_subjects, std::uint64_t seed) {
    CohortMatrix m;
    for (int s = 0; s < n_subjects; ++s) m.subjects.push_back("s" + std::to_string(100 + s));
    for (Family fam : {Family::shape, Family::firstorder, Family::glcm, Family::glszm})
        for (int k = 0; k < 5; ++k)
            m.columns.push_back({"ROI1", fam, feature_names(fam)[std::size_t(k)]});
    Rng rng(seed);
    m.data.resize(m.subjects.size() * m.columns.size());
    for (auto& v : m.data) v = rng.uniform(-4, 9);
    return m;
}

}  // namespace

TEST_CASE("identical cohorts give perfect similarity") {
    CohortMatrix real = toy_cohort(12, 21);
    SimilarityReport rep = family_report(real, real);
    REQUIRE(rep.cells.size() == 4);
    for (const auto& cell : rep.cells) {
        CHECK(cell.cosine == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cell.pearson_r == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cell.spearman_rho == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cell.pearson_p == 0.0);
        CHECK(cell.n == 12 * 5);
    }
}

TEST_CASE("small perturbations keep spearman high") {
    CohortMatrix real = toy_cohort(30, 22);
    CohortMatrix synth = real;
    // per-column std scales with the real cohort, so perturb per column
    Rng rng(23);
    for (std::size_t c = 0; c < real.columns.size(); ++c) {
        double m = 0;
        for (std::size_t r = 0; r < real.subjects.size(); ++r) m += real.at(r, c);
        m /= double(real.subjects.size());
        double var = 0;
        for (std::size_t r = 0; r < real.subjects.size(); ++r)
            var += (real.at(r, c) - m) * (real.at(r, c) - m);
        double sd = std::sqrt(var / double(real.subjects.size()));
        for (std::size_t r = 0; r < real.subjects.size(); ++r)
            synth.at(r, c) += 0.01 * sd * rng.gaussian();
    }
    SimilarityReport rep = family_report(real, synth);
    for (const auto& cell : rep.cells) {
        CHECK(cell.spearman_rho >= 0.99);
        CHECK(cell.pearson_r >= 0.99);
        CHECK(cell.cosine >= 0.99);
    }
}

TEST_CASE("report cells are invariant to consistent subject reordering") {
    CohortMatrix real = toy_cohort(10, 24);
    CohortMatrix synth = toy_cohort(10, 25);
    SimilarityReport a = family_report(real, synth);

    // rotate the rows of both cohorts identically
    auto rotate_rows = [](CohortMatrix m) {
        CohortMatrix out = m;
        std::size_t nc = m.columns.size(), nr = m.subjects.size();
        for (std::size_t r = 0; r < nr; ++r) {
            std::size_t src = (r + 3) % nr;
            out.subjects[r] = m.subjects[src];
            for (std::size_t c = 0; c < nc; ++c) out.at(r, c) = m.at(src, c);
        }
        return out;
    };
    SimilarityReport b = family_report(rotate_rows(real), rotate_rows(synth));
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(close_rel(a.cells[i].cosine, b.cells[i].cosine, 1e-12));
        CHECK(close_rel(a.cells[i].pearson_r, b.cells[i].pearson_r, 1e-12));
        CHECK(close_rel(a.cells[i].spearman_rho, b.cells[i].spearman_rho, 1e-12));
    }
}

TEST_CASE("family report validates schema and subjects") {
    CohortMatrix real = toy_cohort(8, 26);
    CohortMatrix other = toy_cohort(8, 27);
    other.subjects[0] = "different";
    CHECK_THROWS(family_report(real, other));
    CohortMatrix wrong_schema = real;
    wrong_schema.columns[0].feature = "sphericity";
    CHECK_THROWS(family_report(real, wrong_schema));
}

TEST_CASE("per feature pairing works and reports subject count") {
    CohortMatrix real = toy_cohort(14, 28);
    CohortMatrix synth = real;
    for (auto& v : synth.data) v += 0.05;
    SimilarityReport rep = family_report(real, synth, Pairing::per_feature);
    for (const auto& cell : rep.cells) {
        CHECK(cell.n == 14);
        CHECK(cell.spearman_rho == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("report rendering marks significant cells") {
    CohortMatrix real = toy_cohort(30, 29);
    SimilarityReport rep = family_report(real, real);
    std::string table = render_report_table(rep);
    CHECK(table.find("Cosine Similarity") != std::string::npos);
    CHECK(table.find("Spearman Correlation") != std::string::npos);
    CHECK(table.find("1.0000*") != std::string::npos);
    CHECK(table.find("Histogram") != std::string::npos);

    std::string dir = temp_dir("stats");
    write_report_csv(rep, dir + "/report.csv");
    std::string csv = slurp_file(dir + "/report.csv");
    CHECK(csv.find("roi,family,metric,value,p,n") == 0);
    CHECK(csv.find("ROI1,Shape,cosine,") != std::string::npos);
    CHECK(csv.find("spearman") != std::string::npos);
}
