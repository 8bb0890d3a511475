#include <cmath>
#include <cstring>

#include "doctest.h"
#include "radsynth/features.hpp"
#include "radsynth/rng.hpp"
#include "radsynth/shape.hpp"
#include "radsynth/synth.hpp"
#include "radsynth_ref.hpp"
#include "test_util.hpp"

using namespace radsynth;
using namespace testutil;

TEST_CASE("fill of a constant image is exact") {
    GridGeometry g = make_geometry(32, 32, 1, 1);
    ImageGrid img = ImageGrid::zeros(g);
    for (auto& v : img.values) v = 42.0;
    BinaryMask m = circular_mask(g, 16, 16, 12);
    ImageGrid filled = background_fill(img, m, 7, true);  // ring std is 0, noise is a no-op
    for (double v : filled.values) CHECK(v == 42.0);
}

TEST_CASE("fill reconstructs linear ramps") {
    GridGeometry g = make_geometry(40, 40, 1, 1);
    ImageGrid ramp = ImageGrid::zeros(g);
    for (int r = 0; r < 40; ++r)
        for (int c = 0; c < 40; ++c) ramp.at(r, c) = 3.0 * c - 2.0 * r + 10;
    BinaryMask m = circular_mask(g, 20, 20, 20);
    ImageGrid filled = background_fill(ramp, m, 7, false);
    double range = (3.0 * 39 + 10) - (-2.0 * 39 + 10);
    double worst = 0;
    for (std::size_t i = 0; i < filled.values.size(); ++i)
        worst = std::max(worst, std::fabs(filled.values[i] - ramp.values[i]));
    CHECK(worst <= 1e-6 * range);
}

TEST_CASE("fill satisfies the discrete maximum principle and residual bound") {
    Rng rng(31);
    GridGeometry g = make_geometry(28, 28, 1, 1);
    for (int t = 0; t < 15; ++t) {
        ImageGrid img = random_image(rng, g, 0, 100);
        BinaryMask m = random_blob_mask(rng, g);
        if (m.pixel_count() == 0 || m.pixel_count() == g.pixel_total()) continue;
        ImageGrid filled = background_fill(img, m, 99, false);

        // Dirichlet data: out-of-mask neighbors of mask pixels
        double lo = 1e300, hi = -1e300, range_all = 0;
        double omin = 1e300, omax = -1e300;
        for (int r = 0; r < 28; ++r)
            for (int c = 0; c < 28; ++c) {
                if (!m.at(r, c)) {
                    omin = std::min(omin, img.at(r, c));
                    omax = std::max(omax, img.at(r, c));
                    bool adjacent = false;
                    for (auto [dr, dc] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
                        int rr = r + dr, cc = c + dc;
                        if (rr >= 0 && rr < 28 && cc >= 0 && cc < 28 && m.at(rr, cc))
                            adjacent = true;
                    }
                    if (adjacent) {
                        lo = std::min(lo, img.at(r, c));
                        hi = std::max(hi, img.at(r, c));
                    }
                }
            }
        range_all = omax - omin;
        const double slack = 1e-6 * range_all;
        double residual = 0;
        for (int r = 0; r < 28; ++r)
            for (int c = 0; c < 28; ++c) {
                if (!m.at(r, c)) {
                    CHECK(filled.at(r, c) == img.at(r, c));  // untouched outside
                    continue;
                }
                CHECK(filled.at(r, c) >= lo - slack);
                CHECK(filled.at(r, c) <= hi + slack);
                if (r > 0 && r < 27 && c > 0 && c < 27) {
                    double s = filled.at(r - 1, c) + filled.at(r + 1, c) + filled.at(r, c - 1) +
                               filled.at(r, c + 1);
                    residual = std::max(residual, std::fabs(4 * filled.at(r, c) - s));
                }
            }
        CHECK(residual <= 1e-6 * range_all);
    }
}

TEST_CASE("fill agrees with the serial reference solver") {
    Rng rng(32);
    GridGeometry g = make_geometry(36, 36, 1, 1);
    ImageGrid img = random_image(rng, g, 0, 200);
    BinaryMask m = circular_mask(g, 18, 17, 16);
    ImageGrid red_black = background_fill(img, m, 1, false);
    ImageGrid serial = ref::sor_fill_serial(img, m);
    double worst = 0;
    for (std::size_t i = 0; i < serial.values.size(); ++i)
        worst = std::max(worst, std::fabs(serial.values[i] - red_black.values[i]));
    CHECK(worst <= 1e-6 * 200);
}

TEST_CASE("fill noise is seeded and local") {
    Rng rng(33);
    GridGeometry g = make_geometry(32, 32, 1, 1);
    ImageGrid img = random_image(rng, g, 0, 50);
    BinaryMask m = circular_mask(g, 16, 16, 10);
    ImageGrid a = background_fill(img, m, 5, true);
    ImageGrid b = background_fill(img, m, 5, true);
    CHECK(std::memcmp(a.values.data(), b.values.data(), a.values.size() * 8) == 0);
    ImageGrid c = background_fill(img, m, 6, true);
    bool differs = false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] != c.values[i]) differs = true;
    CHECK(differs);
    for (int r = 0; r < 32; ++r)
        for (int col = 0; col < 32; ++col)
            if (!m.at(r, col)) CHECK(a.at(r, col) == img.at(r, col));
}

TEST_CASE("fill rejects empty and full masks") {
    GridGeometry g = make_geometry(8, 8, 1, 1);
    ImageGrid img = ImageGrid::zeros(g);
    CHECK_THROWS(background_fill(img, BinaryMask::zeros(g), 1));
    BinaryMask all = BinaryMask::zeros(g);
    std::fill(all.bits.begin(), all.bits.end(), 1);
    CHECK_THROWS(background_fill(img, all, 1));
}

TEST_CASE("render blob produces a disk when unmodulated") {
    GridGeometry g = make_geometry(96, 96, 1, 1);
    ImageGrid bg = ImageGrid::zeros(g);
    BlobParams p;
    p.cx = 48;
    p.cy = 48;
    p.r0 = 25;
    p.core_ratio = 0.5;
    auto [img, labels] = render_blob(p, g, bg, 11);

    BinaryMask uni = mask_from_labels(labels, {"u", {1, 4}, {}});
    ShapeFeatures s = compute_shape(uni);
    CHECK(s.sphericity >= 0.94);  // the estimator's disk ceiling, see test_shape
    CHECK(s.pixel_surface == doctest::Approx(M_PI * 25 * 25).epsilon(0.05));

    BinaryMask core = mask_from_labels(labels, {"c", {1}, {}});
    double ratio = double(core.pixel_count()) / double(uni.pixel_count());
    CHECK(std::fabs(ratio - 0.25) / 0.25 < 0.10);  // core_ratio^2 within 10%
}

TEST_CASE("render blob is deterministic and local") {
    GridGeometry g = make_geometry(64, 64, 1, 1);
    Rng rng(34);
    ImageGrid bg = random_image(rng, g, 0, 100);
    BlobParams p;
    p.cx = 30;
    p.cy = 34;
    p.r0 = 12;
    p.a[1] = 0.1;
    p.b[3] = -0.08;
    p.smooth_px = 2;
    auto [img1, lab1] = render_blob(p, g, bg, 21);
    auto [img2, lab2] = render_blob(p, g, bg, 21);
    CHECK(std::memcmp(img1.values.data(), img2.values.data(), img1.values.size() * 8) == 0);
    CHECK(lab1.labels == lab2.labels);
    for (std::size_t i = 0; i < lab1.labels.size(); ++i)
        if (lab1.labels[i] == 0) CHECK(img1.values[i] == bg.values[i]);
}

TEST_CASE("render blob validates its inputs") {
    GridGeometry g = make_geometry(64, 64, 1, 1);
    ImageGrid bg = ImageGrid::zeros(g);
    BlobParams outside;
    outside.cx = 5;
    outside.cy = 5;
    outside.r0 = 20;
    CHECK_THROWS(render_blob(outside, g, bg, 1));

    BlobParams negative;
    negative.cx = 32;
    negative.cy = 32;
    negative.r0 = 10;
    negative.a[0] = -1.5;  // r(theta) dips below zero
    CHECK_THROWS(render_blob(negative, g, bg, 1));

    BlobParams bad_core;
    bad_core.cx = 32;
    bad_core.cy = 32;
    bad_core.r0 = 10;
    bad_core.core_ratio = 0.99;
    CHECK_THROWS(render_blob(bad_core, g, bg, 1));
}

TEST_CASE("target spec json round trip and validation") {
    TargetSpec spec;
    spec.mask_diameter = 40;
    spec.targets = {{"ROI2", "pixel_surface", 500, 1.0, 50.0},
                    {"ROI2", "sphericity", 0.9, 1.0, 0.05}};
    TargetSpec back = target_spec_from_json(target_spec_to_json(spec));
    CHECK(back.mask_diameter == 40);
    REQUIRE(back.targets.size() == 2);
    CHECK(back.targets[0].feature == "pixel_surface");
    CHECK(back.targets[1].scale == 0.05);

    CHECK_THROWS(target_spec_from_json(R"({"mask_diameter_mm": 0, "targets": []})"));
    CHECK_THROWS(target_spec_from_json(
        R"({"mask_diameter_mm": 10, "targets": [{"roi":"ROI2","feature":"nope","value":1}]})"));
    CHECK_THROWS(target_spec_from_json(
        R"({"mask_diameter_mm": 10, "targets": [{"roi":"ROI2","feature":"mean","value":1,"weight":-1}]})"));
}

TEST_CASE("budget one returns the rendered initial guess") {
    auto [bg, labels] = make_phantom(900, make_geometry(96, 96, 1, 1));
    BinaryMask tumor = BinaryMask::zeros(bg.geom);
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i]) tumor.bits[i] = 1;
    ImageGrid clean = background_fill(bg, tumor, 4, true);

    TargetSpec spec;
    spec.mask_diameter = 36;
    spec.targets = {{"ROI2", "pixel_surface", 300, 1.0, 30.0},
                    {"ROI2", "sphericity", 0.9, 1.0, 0.05},
                    {"ROI1", "mean", 50, 1.0, 50.0}};
    SynthesisResult res = synthesize(clean, 48, 48, spec, 77, 1);
    CHECK(res.evaluations == 1);
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].first == 1);
    CHECK(res.trace[0].second == res.objective);

    // recompute the loss from the returned render: must match exactly
    FeatureVector fv = extract_features(res.image, res.labels, default_rois(), {});
    double loss = 0;
    for (const auto& t : spec.targets) {
        const double* f = fv.find(t.roi, t.feature);
        REQUIRE(f != nullptr);
        double d = (*f - t.value) / t.scale;
        loss += t.weight * d * d;
    }
    CHECK(res.objective == loss);
}

TEST_CASE("synthesis improves on the initial guess and stays inside the mask") {
    auto [bg, labels] = make_phantom(901, make_geometry(96, 96, 1, 1));
    BinaryMask tumor = BinaryMask::zeros(bg.geom);
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i]) tumor.bits[i] = 1;
    ImageGrid clean = background_fill(bg, tumor, 4, true);

    TargetSpec spec;
    spec.mask_diameter = 40;
    spec.targets = {{"ROI2", "pixel_surface", 420, 1.0, 42.0},
                    {"ROI2", "sphericity", 0.8, 1.0, 0.05}};
    SynthesisResult res = synthesize(clean, 48, 48, spec, 5, 1500);
    CHECK(res.objective <= res.trace.front().second);
    CHECK(res.evaluations == 1500);
    CHECK(res.objective < 0.1);

    BinaryMask circle = circular_mask(clean.geom, 48, 48, 40);
    for (int r = 0; r < 96; ++r)
        for (int c = 0; c < 96; ++c) {
            if (!circle.at(r, c)) {
                CHECK(res.labels.at(r, c) == 0);
                CHECK(res.image.at(r, c) == clean.at(r, c));
            }
        }
}

TEST_CASE("different seeds give different tumors for the same target") {
    auto [bg, labels] = make_phantom(902, make_geometry(96, 96, 1, 1));
    BinaryMask tumor = BinaryMask::zeros(bg.geom);
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i]) tumor.bits[i] = 1;
    ImageGrid clean = background_fill(bg, tumor, 4, true);

    TargetSpec spec;
    spec.mask_diameter = 40;
    spec.targets = {{"ROI2", "pixel_surface", 380, 1.0, 38.0},
                    {"ROI2", "sphericity", 0.85, 1.0, 0.05}};
    SynthesisResult a = synthesize(clean, 48, 48, spec, 1000, 500);
    SynthesisResult b = synthesize(clean, 48, 48, spec, 2000, 500);
    std::int64_t hamming = 0;
    for (std::size_t i = 0; i < a.labels.labels.size(); ++i)
        if (a.labels.labels[i] != b.labels.labels[i]) ++hamming;
    CHECK(hamming > 0);
    CHECK(a.objective < 1.0);
    CHECK(b.objective < 1.0);

    SynthesisResult a2 = synthesize(clean, 48, 48, spec, 1000, 500);
    CHECK(a2.labels.labels == a.labels.labels);
    CHECK(a2.objective == a.objective);
}

TEST_CASE("synthesize validates inputs") {
    GridGeometry g = make_geometry(64, 64, 1, 1);
    ImageGrid bg = ImageGrid::zeros(g);
    TargetSpec spec;
    spec.mask_diameter = 20;
    spec.targets = {{"ROI2", "pixel_surface", 100, 1.0, 10.0}};
    CHECK_THROWS(synthesize(bg, 32, 32, spec, 1, 0));      // budget < 1
    CHECK_THROWS(synthesize(bg, -200, -200, spec, 1, 10)); // circle outside grid
    TargetSpec empty;
    empty.mask_diameter = 20;
    CHECK_THROWS(synthesize(bg, 32, 32, empty, 1, 10));
}

TEST_CASE("phantoms are seeded and extractable") {
    GridGeometry g = make_geometry(96, 96, 1, 1);
    auto [img1, lab1] = make_phantom(123, g);
    auto [img2, lab2] = make_phantom(123, g);
    CHECK(std::memcmp(img1.values.data(), img2.values.data(), img1.values.size() * 8) == 0);
    CHECK(lab1.labels == lab2.labels);

    FeatureVector fv = extract_features(img1, lab1, default_rois(), {});
    CHECK(fv.absent_rois.empty());
    CHECK(fv.keys.size() == 134);

    auto [img3, lab3] = make_phantom(124, g);
    CHECK(img3.values != img1.values);

    CHECK_THROWS(make_phantom(1, make_geometry(32, 32, 1, 1)));
}

TEST_CASE("replace tumor removal mode clears labels") {
    GridGeometry g = make_geometry(96, 96, 1, 1);
    auto [img, labels] = make_phantom(125, g);
    SynthesisResult removed = replace_tumor(img, labels, 0, 0, nullptr, 9, 1);
    for (auto v : removed.labels.labels) CHECK(v == 0);
    // filled area no longer carries the bright rim
    BinaryMask tumor = BinaryMask::zeros(g);
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i]) tumor.bits[i] = 1;
    double worst = 0;
    for (std::size_t i = 0; i < tumor.bits.size(); ++i)
        if (tumor.bits[i]) worst = std::max(worst, removed.image.values[i]);
    double bg_hi = 0;
    for (std::size_t i = 0; i < tumor.bits.size(); ++i)
        if (!tumor.bits[i]) bg_hi = std::max(bg_hi, img.values[i]);
    CHECK(worst < bg_hi + 20);

    LabelGrid empty = LabelGrid::zeros(g);
    CHECK_THROWS(replace_tumor(img, empty, 0, 0, nullptr, 9, 1));
}

TEST_CASE("replace tumor synthesizes at the new location") {
    GridGeometry g = make_geometry(112, 112, 1, 1);
    auto [img, labels] = make_phantom(126, g);
    TargetSpec spec;
    spec.mask_diameter = 30;
    spec.targets = {{"ROI2", "pixel_surface", 250, 1.0, 25.0},
                    {"ROI2", "sphericity", 0.9, 1.0, 0.05}};
    SynthesisResult res = replace_tumor(img, labels, 30, 80, &spec, 10, 400);
    BinaryMask circle = circular_mask(g, 30, 80, 30);
    bool has_labels = false;
    for (int r = 0; r < 112; ++r)
        for (int c = 0; c < 112; ++c) {
            if (res.labels.at(r, c) != 0) {
                has_labels = true;
                CHECK(circle.at(r, c));
            }
        }
    CHECK(has_labels);

    CHECK_THROWS(replace_tumor(img, labels, -500, -500, &spec, 10, 50));
}

TEST_CASE("target from features conditions on the union diameter") {
    GridGeometry g = make_geometry(96, 96, 1, 1);
    auto [img, labels] = make_phantom(127, g);
    FeatureVector fv = extract_features(img, labels, default_rois(), {});
    TargetSpec spec = target_from_features(fv);
    CHECK(spec.targets.size() == 134);
    const double* d = fv.find("ROI2", "maximum_diameter");
    REQUIRE(d != nullptr);
    CHECK(spec.mask_diameter == doctest::Approx(1.15 * *d));
    for (const auto& t : spec.targets) {
        CHECK(t.weight > 0);
        CHECK(t.scale > 0);
        if (t.feature == "contrast") CHECK(t.weight == doctest::Approx(0.25));
        if (t.feature == "mean") CHECK(t.weight == doctest::Approx(1.0));
    }
}
