#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "radsynth/firstorder.hpp"
#include "radsynth/rng.hpp"
#include "radsynth_ref.hpp"
#include "test_util.hpp"

using namespace radsynth;
using namespace testutil;

TEST_CASE("discretize fixed bin width") {
    Discretized d = discretize({0, 25, 50}, {});
    CHECK(d.bins == std::vector<int>{1, 2, 3});
    CHECK(d.n_levels == 3);

    Discretized c = discretize({7, 7, 7}, {});
    CHECK(c.bins == std::vector<int>{1, 1, 1});
    CHECK(c.n_levels == 1);

    CHECK_THROWS(discretize({}, {}));
    DiscretizationConfig bad;
    bad.bin_width = 0;
    CHECK_THROWS(discretize({1.0, 2.0}, bad));
}

TEST_CASE("discretize shift anchoring") {
    Rng rng(9);
    std::vector<double> values;
    for (int i = 0; i < 120; ++i) values.push_back(std::floor(rng.uniform(0, 200)));
    Discretized base = discretize(values, {});
    std::vector<double> shifted = values;
    for (double& v : shifted) v += 37.0;
    Discretized moved = discretize(shifted, {});
    CHECK(base.bins == moved.bins);
    CHECK(base.n_levels == moved.n_levels);
}

TEST_CASE("discretize fixed bin count puts max in top bin") {
    DiscretizationConfig cfg;
    cfg.mode = DiscretizationConfig::Mode::fixed_bin_count;
    cfg.bin_count = 4;
    Discretized d = discretize({0, 1, 2, 3, 4}, cfg);
    CHECK(d.n_levels == 4);
    CHECK(d.bins.front() == 1);
    CHECK(d.bins.back() == 4);
    cfg.bin_count = 1;
    CHECK_THROWS(discretize({0.0, 1.0}, cfg));
}

TEST_CASE("hand values for {1,2,3}") {
    FirstOrderFeatures f = compute_first_order({1, 2, 3}, 1.0, {});
    CHECK(f.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(f.energy == doctest::Approx(14.0).epsilon(1e-15));
    CHECK(f.range == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f.median == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f.minimum == 1.0);
    CHECK(f.maximum == 3.0);
    CHECK(f.root_mean_squared == doctest::Approx(std::sqrt(14.0 / 3.0)).epsilon(1e-15));
    CHECK(f.interquartile_range == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.total_energy == doctest::Approx(14.0).epsilon(1e-15));
}

TEST_CASE("constant input conventions") {
    FirstOrderFeatures f = compute_first_order({5, 5, 5, 5}, 2.0, {});
    CHECK(f.entropy == 0.0);
    CHECK(f.uniformity == 1.0);
    CHECK(f.skewness == 0.0);
    CHECK(f.kurtosis == 0.0);
    CHECK(f.variance == 0.0);
    CHECK(f.total_energy == doctest::Approx(2.0 * 4 * 25));
    CHECK_THROWS(compute_first_order({}, 1.0, {}));
}

TEST_CASE("brute force oracle agreement on random samples") {
    Rng rng(41);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> values;
        int n = rng.uniform_int(5, 200);
        for (int i = 0; i < n; ++i) values.push_back(rng.uniform(-40, 160));
        double area = rng.uniform(0.25, 4.0);
        FirstOrderFeatures a = compute_first_order(values, area, {});
        FirstOrderFeatures b = ref::first_order_reference(values, area, {});
        CHECK(close_rel(a.energy, b.energy, 1e-12));
        CHECK(close_rel(a.entropy, b.entropy, 1e-12));
        CHECK(close_rel(a.interquartile_range, b.interquartile_range, 1e-12));
        CHECK(close_rel(a.kurtosis, b.kurtosis, 1e-12));
        CHECK(close_rel(a.maximum, b.maximum, 1e-12));
        CHECK(close_rel(a.mean, b.mean, 1e-12));
        CHECK(close_rel(a.mean_absolute_deviation, b.mean_absolute_deviation, 1e-12));
        CHECK(close_rel(a.median, b.median, 1e-12));
        CHECK(close_rel(a.minimum, b.minimum, 1e-12));
        CHECK(close_rel(a.p10, b.p10, 1e-12));
        CHECK(close_rel(a.p90, b.p90, 1e-12));
        CHECK(close_rel(a.range, b.range, 1e-12));
        CHECK(close_rel(a.robust_mean_absolute_deviation, b.robust_mean_absolute_deviation, 1e-12));
        CHECK(close_rel(a.root_mean_squared, b.root_mean_squared, 1e-12));
        CHECK(close_rel(a.skewness, b.skewness, 1e-10, 1e-10));
        CHECK(close_rel(a.total_energy, b.total_energy, 1e-12));
        CHECK(close_rel(a.uniformity, b.uniformity, 1e-12));
        CHECK(close_rel(a.variance, b.variance, 1e-12));
    }
}

TEST_CASE("percentile ordering invariant") {
    Rng rng(42);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> values;
        int n = rng.uniform_int(3, 60);
        for (int i = 0; i < n; ++i) values.push_back(rng.uniform(-10, 10));
        FirstOrderFeatures f = compute_first_order(values, 1.0, {});
        CHECK(f.minimum <= f.p10);
        CHECK(f.p10 <= f.median);
        CHECK(f.median <= f.p90);
        CHECK(f.p90 <= f.maximum);
        CHECK(f.variance >= 0);
        CHECK(f.uniformity > 0);
        CHECK(f.uniformity <= 1.0 + 1e-15);
        CHECK(f.entropy >= 0);
    }
}

TEST_CASE("shift equivariance on integer data") {
    Rng rng(43);
    std::vector<double> values;
    for (int i = 0; i < 97; ++i) values.push_back(std::floor(rng.uniform(0, 300)));
    const double c = 64.0;
    std::vector<double> shifted = values;
    for (double& v : shifted) v += c;

    FirstOrderFeatures a = compute_first_order(values, 1.0, {});
    FirstOrderFeatures b = compute_first_order(shifted, 1.0, {});

    // invariant features: exact
    CHECK(a.variance == b.variance);
    CHECK(a.interquartile_range == b.interquartile_range);
    CHECK(a.range == b.range);
    CHECK(a.mean_absolute_deviation == b.mean_absolute_deviation);
    CHECK(a.robust_mean_absolute_deviation == b.robust_mean_absolute_deviation);
    CHECK(a.entropy == b.entropy);
    CHECK(a.uniformity == b.uniformity);
    CHECK(a.skewness == b.skewness);
    CHECK(a.kurtosis == b.kurtosis);

    // location features shift by c
    CHECK(close_rel(b.minimum, a.minimum + c, 1e-12));
    CHECK(close_rel(b.maximum, a.maximum + c, 1e-12));
    CHECK(close_rel(b.mean, a.mean + c, 1e-12));
    CHECK(close_rel(b.median, a.median + c, 1e-12));
    CHECK(close_rel(b.p10, a.p10 + c, 1e-12));
    CHECK(close_rel(b.p90, a.p90 + c, 1e-12));
}

TEST_CASE("permutation invariance is exact") {
    Rng rng(44);
    std::vector<double> values;
    for (int i = 0; i < 64; ++i) values.push_back(rng.uniform(-5, 5));
    FirstOrderFeatures a = compute_first_order(values, 1.0, {});
    for (std::size_t i = values.size() - 1; i > 0; --i)
        std::swap(values[i], values[std::size_t(rng.next_u64() % (i + 1))]);
    FirstOrderFeatures b = compute_first_order(values, 1.0, {});
    CHECK(a.mean == b.mean);
    CHECK(a.energy == b.energy);
    CHECK(a.variance == b.variance);
    CHECK(a.skewness == b.skewness);
    CHECK(a.kurtosis == b.kurtosis);
    CHECK(a.entropy == b.entropy);
    CHECK(a.median == b.median);
    CHECK(a.robust_mean_absolute_deviation == b.robust_mean_absolute_deviation);
}

TEST_CASE("rms squared equals energy over n") {
    Rng rng(45);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> values;
        int n = rng.uniform_int(2, 50);
        for (int i = 0; i < n; ++i) values.push_back(rng.uniform(0, 9));
        FirstOrderFeatures f = compute_first_order(values, 1.0, {});
        CHECK(close_rel(f.root_mean_squared * f.root_mean_squared, f.energy / n, 1e-15));
    }
}
