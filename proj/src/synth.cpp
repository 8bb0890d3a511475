#include "radsynth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "radsynth/rng.hpp"
#include "radsynth/texture.hpp"

#include "json.hpp"

namespace radsynth {

using nlohmann::json;

double blob_radius(const BlobParams& p, double theta) {
    double m = 1.0;
    for (int k = 0; k < 6; ++k)
        m += p.a[std::size_t(k)] * std::cos((k + 1) * theta) +
             p.b[std::size_t(k)] * std::sin((k + 1) * theta);
    return p.r0 * m;
}

bool blob_radius_positive(const BlobParams& p) {
    if (!(p.r0 > 0)) return false;
    for (int i = 0; i < 720; ++i)
        if (!(blob_radius(p, i * kTwoPi / 720) > 0)) return false;
    return true;
}

namespace {

double blob_max_radius(const BlobParams& p) {
    double m = 0;
    for (int i = 0; i < 720; ++i) m = std::max(m, blob_radius(p, i * kTwoPi / 720));
    return m;
}

bool blob_in_grid(const BlobParams& p, const GridGeometry& g) {
    for (int i = 0; i < 720; ++i) {
        double th = i * kTwoPi / 720;
        double r = blob_radius(p, th);
        double x = p.cx + r * std::cos(th), y = p.cy + r * std::sin(th);
        if (x < 0 || x > g.extent_x() || y < 0 || y > g.extent_y()) return false;
    }
    return true;
}

bool blob_in_circle(const BlobParams& p, double cx, double cy, double diameter) {
    const double rad = diameter / 2;
    for (int i = 0; i < 720; ++i) {
        double th = i * kTwoPi / 720;
        double r = blob_radius(p, th);
        double x = p.cx + r * std::cos(th) - cx, y = p.cy + r * std::sin(th) - cy;
        if (x * x + y * y > rad * rad) return false;
    }
    return true;
}

// Sliding box blur over a window buffer, clamp-to-edge, radius m.
void box_blur(std::vector<double>& buf, int bw, int bh, int m) {
    if (m < 1) return;
    std::vector<double> tmp(buf.size());
    const double inv = 1.0;
    for (int r = 0; r < bh; ++r) {
        for (int c = 0; c < bw; ++c) {
            double s = 0;
            int lo = std::max(0, c - m), hi = std::min(bw - 1, c + m);
            for (int k = lo; k <= hi; ++k) s += buf[std::size_t(r) * bw + k];
            tmp[std::size_t(r) * bw + c] = s / (hi - lo + 1) * inv;
        }
    }
    for (int c = 0; c < bw; ++c) {
        for (int r = 0; r < bh; ++r) {
            double s = 0;
            int lo = std::max(0, r - m), hi = std::min(bh - 1, r + m);
            for (int k = lo; k <= hi; ++k) s += tmp[std::size_t(k) * bw + c];
            buf[std::size_t(r) * bw + c] = s / (hi - lo + 1);
        }
    }
}

}  // namespace

ImageGrid background_fill(const ImageGrid& image, const BinaryMask& mask, std::uint64_t seed,
                          bool noise, const SorOptions& opts) {
    require_same_geometry(image.geom, mask.geom, "background_fill");
    const int w = image.geom.width, h = image.geom.height;
    const std::int64_t np = mask.pixel_count();
    if (np == 0) throw std::invalid_argument("background_fill: empty mask");
    if (np == image.geom.pixel_total())
        throw std::invalid_argument("background_fill: mask covers the entire image");

    // 2-pixel outer boundary ring: noise statistics, fill seed value and the
    // intensity range for the convergence threshold.
    double ring_sum = 0, ring_sum2 = 0;
    std::int64_t ring_n = 0;
    double out_min = 0, out_max = 0;
    bool have_out = false;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (mask.at(r, c)) continue;
            double v = image.at(r, c);
            if (!have_out) {
                out_min = out_max = v;
                have_out = true;
            } else {
                out_min = std::min(out_min, v);
                out_max = std::max(out_max, v);
            }
            bool near = false;
            for (int dr = -2; dr <= 2 && !near; ++dr)
                for (int dc = -2; dc <= 2 && !near; ++dc) {
                    int rr = r + dr, cc = c + dc;
                    if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                    if (mask.at(rr, cc)) near = true;
                }
            if (near) {
                ring_sum += v;
                ring_sum2 += v * v;
                ++ring_n;
            }
        }
    const double ring_mean = ring_sum / double(ring_n);
    double ring_var = ring_sum2 / double(ring_n) - ring_mean * ring_mean;
    const double ring_std = std::sqrt(std::max(0.0, ring_var));
    const double range = out_max - out_min;
    const double tol = opts.tol_rel * range;

    ImageGrid u = image;
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        if (mask.bits[i]) u.values[i] = ring_mean;

    // Red-black SOR: each half-sweep only reads the other color, so the
    // result is independent of the thread count.
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
            for (int r = 0; r < h; ++r) {
                for (int c = (r + color) & 1; c < w; c += 2) {
                    if (!mask.at(r, c)) continue;
                    double s = 0;
                    int cnt = 0;
                    if (r > 0) { s += u.at(r - 1, c); ++cnt; }
                    if (r < h - 1) { s += u.at(r + 1, c); ++cnt; }
                    if (c > 0) { s += u.at(r, c - 1); ++cnt; }
                    if (c < w - 1) { s += u.at(r, c + 1); ++cnt; }
                    u.at(r, c) += opts.omega * (s / cnt - u.at(r, c));
                }
            }
        }
        double res = 0;
#pragma omp parallel for schedule(static) reduction(max : res)
        for (int r = 0; r < h; ++r) {
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
        }
        if (res <= tol) break;
    }

    if (noise && ring_std > 0) {
        for (std::size_t i = 0; i < mask.bits.size(); ++i)
            if (mask.bits[i]) u.values[i] += ring_std * gaussian_at(seed, i);
    }
    return u;
}

std::pair<ImageGrid, LabelGrid> render_blob(const BlobParams& p, const GridGeometry& geom,
                                            const ImageGrid& background, std::uint64_t seed) {
    require_same_geometry(geom, background.geom, "render_blob");
    if (!blob_radius_positive(p))
        throw std::invalid_argument("render_blob: blob radius must stay positive");
    if (!(p.core_ratio > 0.05 && p.core_ratio < 0.95))
        throw std::invalid_argument("render_blob: core_ratio out of (0.05, 0.95)");
    if (!blob_in_grid(p, geom)) throw std::invalid_argument("render_blob: blob outside grid");

    const int w = geom.width, h = geom.height;
    const double sx = geom.spacing_x, sy = geom.spacing_y;
    const int m = int(std::lround(std::max(0.0, p.smooth_px)));
    const double rmax = blob_max_radius(p);

    int c0 = std::max(0, int(std::floor((p.cx - rmax) / sx)) - m - 1);
    int c1 = std::min(w - 1, int(std::ceil((p.cx + rmax) / sx)) + m + 1);
    int r0 = std::max(0, int(std::floor((p.cy - rmax) / sy)) - m - 1);
    int r1 = std::min(h - 1, int(std::ceil((p.cy + rmax) / sy)) + m + 1);
    const int bw = c1 - c0 + 1, bh = r1 - r0 + 1;

    std::vector<double> field(std::size_t(bw) * bh);
    std::vector<double> alpha(std::size_t(bw) * bh);
    std::vector<std::uint8_t> lab(std::size_t(bw) * bh, 0);

#pragma omp parallel for schedule(static)
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            double px = (c + 0.5) * sx, py = (r + 0.5) * sy;
            double dx = px - p.cx, dy = py - p.cy;
            double d = std::sqrt(dx * dx + dy * dy);
            double rt = blob_radius(p, std::atan2(dy, dx));
            std::size_t bi = std::size_t(r - r0) * bw + (c - c0);
            bool in_core = d < p.core_ratio * rt;
            bool in_blob = d < rt;
            lab[bi] = in_core ? 1 : (in_blob ? 4 : 0);
            alpha[bi] = in_blob ? 1.0 : 0.0;
            std::size_t gi = std::size_t(r) * w + c;
            field[bi] = (in_core ? p.mu_ncr : p.mu_et) + p.sigma_tex * gaussian_at(seed, gi);
        }
    }
    box_blur(field, bw, bh, m);
    box_blur(alpha, bw, bh, m);

    ImageGrid image = background;
    LabelGrid labels = LabelGrid::zeros(geom);
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
            std::size_t bi = std::size_t(r - r0) * bw + (c - c0);
            if (lab[bi] == 0) continue;
            std::size_t gi = std::size_t(r) * w + c;
            double a = alpha[bi];
            image.values[gi] = a * field[bi] + (1 - a) * background.values[gi];
            labels.labels[gi] = lab[bi];
        }
    return {std::move(image), std::move(labels)};
}

// ---- target specs ----

namespace {

Family family_of_feature(const std::string& feature) {
    for (Family fam : {Family::shape, Family::firstorder, Family::glcm, Family::glszm}) {
        const auto& names = feature_names(fam);
        if (std::find(names.begin(), names.end(), feature) != names.end()) return fam;
    }
    throw std::invalid_argument("unknown feature name in target spec: " + feature);
}

void validate_target(const TargetSpec& spec) {
    if (spec.targets.empty()) throw std::invalid_argument("target spec has no targets");
    if (!(spec.mask_diameter > 0))
        throw std::invalid_argument("target spec needs mask_diameter_mm > 0");
    double wsum = 0;
    for (const auto& t : spec.targets) {
        if (!(t.weight > 0)) throw std::invalid_argument("target weights must be > 0");
        if (!(t.scale > 0)) throw std::invalid_argument("target scales must be > 0");
        family_of_feature(t.feature);
        wsum += t.weight;
    }
    if (!(wsum > 0)) throw std::invalid_argument("zero-weight target set");
}

}  // namespace

TargetSpec target_spec_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    TargetSpec spec;
    spec.mask_diameter = j.at("mask_diameter_mm").get<double>();
    for (const auto& t : j.at("targets")) {
        TargetEntry e;
        e.roi = t.at("roi").get<std::string>();
        e.feature = t.at("feature").get<std::string>();
        e.value = t.at("value").get<double>();
        e.weight = t.value("weight", 1.0);
        e.scale = t.value("scale", std::max(std::fabs(e.value), 1.0));
        spec.targets.push_back(e);
    }
    validate_target(spec);
    return spec;
}

std::string target_spec_to_json(const TargetSpec& spec) {
    json j;
    j["mask_diameter_mm"] = spec.mask_diameter;
    json arr = json::array();
    for (const auto& t : spec.targets)
        arr.push_back({{"roi", t.roi},
                       {"feature", t.feature},
                       {"value", t.value},
                       {"weight", t.weight},
                       {"scale", t.scale}});
    j["targets"] = arr;
    return j.dump(2) + "\n";
}

TargetSpec target_from_features(const FeatureVector& fv, double mask_scale, double shape_weight,
                                double firstorder_weight, double texture_weight) {
    TargetSpec spec;
    double max_diam = 0;
    for (std::size_t i = 0; i < fv.keys.size(); ++i) {
        const FeatureKey& k = fv.keys[i];
        double w = shape_weight;
        if (k.family == Family::firstorder) w = firstorder_weight;
        if (k.family == Family::glcm || k.family == Family::glszm) w = texture_weight;
        if (w <= 0) continue;
        TargetEntry e;
        e.roi = k.roi;
        e.feature = k.feature;
        e.value = fv.values[i];
        e.weight = w;
        // Scale = magnitude times the family's seed-to-seed reproducibility:
        // shape is deterministic given the labels, histogram statistics move
        // a few percent between noise realizations, co-occurrence more, and
        // zone statistics (largest-zone sizes enter squared) the most. This
        // keeps the reproducibility floor of a perfectly recovered model
        // well below any meaningful residual.
        double repro = 1.0;
        if (k.family == Family::firstorder) repro = 4.0;
        if (k.family == Family::glcm) repro = 8.0;
        if (k.family == Family::glszm) repro = 25.0;
        e.scale = std::max(std::fabs(e.value), 1.0) * repro;
        spec.targets.push_back(e);
        if (k.feature == "maximum_diameter") max_diam = std::max(max_diam, fv.values[i]);
    }
    spec.mask_diameter = mask_scale * max_diam;
    validate_target(spec);
    return spec;
}

// ---- inverse synthesis ----

namespace {

struct Objective {
    std::vector<RoiSpec> rois;  // only the ROIs the targets name
    DiscretizationConfig disc;
    FamilySelection selection{false, false, false, false};
    const TargetSpec* spec = nullptr;

    explicit Objective(const TargetSpec& s) : spec(&s) {
        for (const auto& t : s.targets) {
            bool roi_known = false;
            for (const auto& roi : default_rois()) roi_known |= roi.name == t.roi;
            if (!roi_known)
                throw std::invalid_argument("target roi not in the configured ROI set: " + t.roi);
            switch (family_of_feature(t.feature)) {
                case Family::shape: selection.shape = true; break;
                case Family::firstorder: selection.firstorder = true; break;
                case Family::glcm: selection.glcm = true; break;
                case Family::glszm: selection.glszm = true; break;
            }
        }
        for (const auto& roi : default_rois()) {
            bool used = false;
            for (const auto& t : s.targets) used |= t.roi == roi.name;
            if (used) rois.push_back(roi);
        }
    }

    double operator()(const ImageGrid& image, const LabelGrid& labels) const {
        FeatureVector fv = extract_features(image, labels, rois, disc, selection);
        double loss = 0;
        for (const auto& t : spec->targets) {
            const double* f = fv.find(t.roi, t.feature);
            if (!f) {
                loss += t.weight * 1e4;  // missing ROI: push hard away
                continue;
            }
            double d = (*f - t.value) / t.scale;
            loss += t.weight * d * d;
        }
        return loss;
    }
};

struct ProposalScales {
    double center, r0, fourier, core, mu, sigma, smooth;
};

// Mostly single-parameter Gaussian moves (clean credit assignment on a rough
// objective), with occasional joint moves.
BlobParams propose(const BlobParams& cur, const ProposalScales& s, Rng& rng) {
    BlobParams p = cur;
    double* fields[19] = {&p.cx,   &p.cy,   &p.r0,   &p.a[0], &p.a[1], &p.a[2], &p.a[3],
                          &p.a[4], &p.a[5], &p.b[0], &p.b[1], &p.b[2], &p.b[3], &p.b[4],
                          &p.b[5], &p.core_ratio, &p.mu_ncr, &p.mu_et, &p.sigma_tex};
    double steps[19];
    steps[0] = steps[1] = s.center;
    steps[2] = s.r0;
    for (int k = 0; k < 6; ++k) steps[3 + k] = steps[9 + k] = s.fourier / (1 + 0.5 * k);
    steps[15] = s.core;
    steps[16] = steps[17] = s.mu;
    steps[18] = s.sigma;

    if (rng.uniform() < 0.7) {
        // one parameter; smooth_px counts as the 20th slot
        int which = rng.uniform_int(0, 19);
        if (which == 19)
            p.smooth_px += s.smooth * rng.gaussian();
        else
            *fields[which] += steps[which] * rng.gaussian();
    } else {
        bool touched = false;
        for (int round = 0; round < 8 && !touched; ++round) {
            for (int i = 0; i < 19; ++i)
                if (rng.uniform() < 0.3) {
                    *fields[i] += steps[i] * rng.gaussian();
                    touched = true;
                }
            if (rng.uniform() < 0.3) {
                p.smooth_px += s.smooth * rng.gaussian();
                touched = true;
            }
        }
    }
    return p;
}

bool feasible(const BlobParams& p, const GridGeometry& geom, double cx, double cy, double diam) {
    if (!(p.r0 > 0)) return false;
    if (!(p.core_ratio > 0.05 && p.core_ratio < 0.95)) return false;
    if (!(p.sigma_tex >= 0)) return false;
    if (p.smooth_px < 0 || p.smooth_px > 4) return false;
    if (!blob_radius_positive(p)) return false;
    if (!blob_in_circle(p, cx, cy, diam)) return false;
    if (!blob_in_grid(p, geom)) return false;
    return true;
}

}  // namespace

SynthesisResult synthesize(const ImageGrid& background, double mask_cx, double mask_cy,
                           const TargetSpec& target, std::uint64_t seed, long budget) {
    validate_target(target);
    if (budget < 1) throw std::invalid_argument("synthesize: budget must be >= 1");
    const GridGeometry& geom = background.geom;
    const double D = target.mask_diameter;
    circular_mask(geom, mask_cx, mask_cy, D);  // throws when infeasible

    Objective objective(target);
    objective.disc = DiscretizationConfig{};

    double bg_mean = 0;
    for (double v : background.values) bg_mean += v;
    bg_mean /= double(background.values.size());
    double bg_var = 0;
    for (double v : background.values) bg_var += (v - bg_mean) * (v - bg_mean);
    const double bg_std = std::sqrt(bg_var / double(background.values.size()));

    auto target_value = [&](const std::string& roi, const std::string& feature) -> const double* {
        for (const auto& t : target.targets)
            if (t.roi == roi && t.feature == feature) return &t.value;
        return nullptr;
    };

    BlobParams p;
    p.cx = mask_cx;
    p.cy = mask_cy;
    const double* s_union = target_value("ROI2", "pixel_surface");
    const double* s_core = target_value("ROI1", "pixel_surface");
    if (s_union && *s_union > 0)
        p.r0 = std::sqrt(*s_union / M_PI);
    else
        p.r0 = D / 4;
    if (s_core && s_union && *s_core > 0 && *s_union > 0)
        p.core_ratio = std::min(0.9, std::max(0.1, std::sqrt(*s_core / *s_union)));
    const double* m1 = target_value("ROI1", "mean");
    const double* m2 = target_value("ROI2", "mean");
    p.mu_ncr = m1 ? *m1 : bg_mean - bg_std;
    p.mu_et = m2 ? *m2 : bg_mean + 2 * bg_std;
    const double* v2 = target_value("ROI2", "variance");
    // the box blur attenuates white-noise variance by ~(2m+1)^2; init assumes m=1
    p.sigma_tex = v2 && *v2 > 0 ? std::min(2.4 * std::sqrt(*v2), 40.0)
                                : std::max(1.0, 0.5 * bg_std);
    p.smooth_px = 1;

    Rng rng(seed);

    // Low sphericity targets need boundary modulation the proposals would
    // take long to accumulate; seed modes 2 and 3 with the energy the
    // first-order perimeter expansion asks for (1/sphericity - 1 ~
    // sum (k^2-1) c_k^2 / 4), random phases for seed diversity.
    const double* sp = target_value("ROI2", "sphericity");
    if (sp && *sp > 0 && *sp < 0.80) {
        double energy = 4.0 * (0.92 / std::max(*sp, 0.35) - 1.0);
        double c2 = std::min(0.30, std::sqrt(0.6 * energy / 3.0));
        double c3 = std::min(0.20, std::sqrt(0.4 * energy / 8.0));
        double ph2 = rng.uniform(0, kTwoPi), ph3 = rng.uniform(0, kTwoPi);
        p.a[1] = c2 * std::cos(ph2);
        p.b[1] = c2 * std::sin(ph2);
        p.a[2] = c3 * std::cos(ph3);
        p.b[2] = c3 * std::sin(ph3);
    }
    // irregular targets need larger boundary moves, round ones finer polish
    double irregularity = sp && *sp > 0 ? std::max(0.0, 0.9 - *sp) : 0.0;
    ProposalScales scales{0.03 * D,
                          0.025 * D,
                          0.015 * (1 + 2.0 * irregularity),
                          0.04,
                          std::max(1.0, 0.5 * bg_std),
                          std::max(0.5, 0.12 * bg_std + 0.5),
                          0.4};

    auto evaluate = [&](const BlobParams& params) {
        auto [img, lab] = render_blob(params, geom, background, seed);
        double loss = objective(img, lab);
        return std::tuple<double, ImageGrid, LabelGrid>(loss, std::move(img), std::move(lab));
    };

    auto jittered_init = [&](double amount) {
        BlobParams q = p;
        q.cx += amount * D * rng.gaussian();
        q.cy += amount * D * rng.gaussian();
        q.r0 *= 1.0 + 2.5 * amount * rng.gaussian();
        q.core_ratio = std::min(0.9, std::max(0.1, q.core_ratio + 1.5 * amount * rng.gaussian()));
        q.r0 = std::min(q.r0, 0.45 * D);
        q.r0 = std::max(q.r0, 1.5 * std::min(geom.spacing_x, geom.spacing_y));
        for (int shrink = 0; shrink < 40 && !feasible(q, geom, mask_cx, mask_cy, D); ++shrink) {
            q.r0 *= 0.85;
            q.a = {};
            q.b = {};
            q.cx = mask_cx;
            q.cy = mask_cy;
        }
        if (!feasible(q, geom, mask_cx, mask_cy, D))
            throw std::invalid_argument("synthesize: no feasible blob fits the conditioning circle");
        return q;
    };

    // Independent annealing chains from differently jittered starts, sharing
    // the evaluation budget; a stuck basin in one chain does not sink the run.
    const int n_chains = budget >= 2000 ? 2 : 1;
    SynthesisResult result;
    result.seed = seed;
    BlobParams best{};
    double best_loss = 0;
    long evals = 0;

    for (int chain = 0; chain < n_chains; ++chain) {
        long chain_budget = budget / n_chains + (chain < budget % n_chains ? 1 : 0);
        if (chain_budget < 1) continue;
        BlobParams cur = jittered_init(chain == 0 ? 0.02 : 0.05);
        auto [loss0, img0, lab0] = evaluate(cur);
        ++evals;
        double cur_loss = loss0;
        const double t0 = loss0;
        if (evals == 1 || loss0 < best_loss) {
            best = cur;
            best_loss = loss0;
            result.trace.push_back({evals, loss0});
        }

        const long attempt_cap = 50 * chain_budget;
        long attempts = 0;
        long k = 0;
        long used = 1;
        while (used < chain_budget && attempts < attempt_cap) {
            ++attempts;
            BlobParams cand = propose(cur, scales, rng);
            if (!feasible(cand, geom, mask_cx, mask_cy, D)) continue;
            auto [loss, img, lab] = evaluate(cand);
            ++evals;
            ++used;
            ++k;
            double temp = t0 * std::pow(0.995, double(k));
            bool accept = loss <= cur_loss;
            if (!accept && temp > 0) accept = rng.uniform() < std::exp(-(loss - cur_loss) / temp);
            if (accept) {
                cur = cand;
                cur_loss = loss;
            }
            if (loss < best_loss) {
                best = cand;
                best_loss = loss;
                result.trace.push_back({evals, loss});
            }
        }
    }

    auto [img, lab] = render_blob(best, geom, background, seed);
    result.achieved = extract_features(img, lab, default_rois(), objective.disc);
    result.image = std::move(img);
    result.labels = std::move(lab);
    result.params = best;
    result.objective = best_loss;
    result.evaluations = evals;
    return result;
}

std::pair<ImageGrid, LabelGrid> make_phantom(std::uint64_t seed, const GridGeometry& geom) {
    if (geom.width < 64 || geom.height < 64)
        throw std::invalid_argument("make_phantom: geometry must be at least 64x64");
    Rng rng(seed);

    struct Component {
        double amp, fx, fy, phase;
    };
    std::array<Component, 8> comps;
    for (auto& c : comps)
        c = {rng.uniform(4.0, 12.0), rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5),
             rng.uniform(0.0, kTwoPi)};

    const double wext = geom.extent_x(), hext = geom.extent_y();
    const std::uint64_t noise_seed = hash_at(seed, 1);
    ImageGrid bg = ImageGrid::zeros(geom);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < geom.height; ++r) {
        for (int c = 0; c < geom.width; ++c) {
            double x = (c + 0.5) * geom.spacing_x, y = (r + 0.5) * geom.spacing_y;
            double v = 120.0;
            for (const auto& cm : comps)
                v += cm.amp * std::cos(kTwoPi * (cm.fx * x / wext + cm.fy * y / hext) + cm.phase);
            std::size_t i = std::size_t(r) * geom.width + c;
            bg.values[i] = v + 3.0 * gaussian_at(noise_seed, i);
        }
    }

    BlobParams p;
    p.r0 = rng.uniform(0.055, 0.10) * std::min(wext, hext);
    p.cx = rng.uniform(0.35, 0.65) * wext;
    p.cy = rng.uniform(0.35, 0.65) * hext;
    for (int k = 0; k < 6; ++k) {
        double cap = 0.12 / (1 + 0.5 * k);
        p.a[std::size_t(k)] = rng.uniform(-cap, cap);
        p.b[std::size_t(k)] = rng.uniform(-cap, cap);
    }
    p.core_ratio = rng.uniform(0.30, 0.65);
    p.mu_ncr = rng.uniform(35.0, 70.0);
    p.mu_et = rng.uniform(185.0, 235.0);
    p.sigma_tex = rng.uniform(4.0, 11.0);
    p.smooth_px = rng.uniform() < 0.4 ? 2 : 1;

    return render_blob(p, geom, bg, hash_at(seed, 2));
}

SynthesisResult replace_tumor(const ImageGrid& image, const LabelGrid& labels, double new_cx,
                              double new_cy, const TargetSpec* target, std::uint64_t seed,
                              long budget, bool fill_noise) {
    require_same_geometry(image.geom, labels.geom, "replace_tumor");
    BinaryMask tumor = BinaryMask::zeros(labels.geom);
    for (std::size_t i = 0; i < labels.labels.size(); ++i)
        if (labels.labels[i] != 0) tumor.bits[i] = 1;
    if (tumor.pixel_count() == 0)
        throw std::invalid_argument("replace_tumor: no tumor labels present");

    ImageGrid filled = background_fill(image, tumor, hash_at(seed, 0xf111), fill_noise);
    if (!target) {
        SynthesisResult out;
        out.image = std::move(filled);
        out.labels = LabelGrid::zeros(image.geom);
        out.seed = seed;
        return out;
    }
    return synthesize(filled, new_cx, new_cy, *target, seed, budget);
}

}  // namespace radsynth
