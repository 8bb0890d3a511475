#include "radsynth/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "radsynth/shape.hpp"
#include "radsynth/texture.hpp"

#include "json.hpp"

namespace radsynth {

using nlohmann::json;

const char* family_name(Family f) {
    switch (f) {
        case Family::shape: return "shape";
        case Family::firstorder: return "firstorder";
        case Family::glcm: return "glcm";
        case Family::glszm: return "glszm";
    }
    return "?";
}

const char* family_display_name(Family f) {
    switch (f) {
        case Family::shape: return "Shape";
        case Family::firstorder: return "Histogram";
        case Family::glcm: return "GLCM";
        case Family::glszm: return "GLSZM";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "shape") return Family::shape;
    if (name == "firstorder") return Family::firstorder;
    if (name == "glcm") return Family::glcm;
    if (name == "glszm") return Family::glszm;
    throw std::invalid_argument("unknown feature family: " + name);
}

const std::vector<std::string>& feature_names(Family f) {
    static const std::vector<std::string> shape_names = {
        "elongation",          "major_axis_length", "maximum_diameter",
        "mesh_surface",        "minor_axis_length", "perimeter",
        "perimeter_surface_ratio", "pixel_surface", "sphericity"};
    static const std::vector<std::string> firstorder_names = {
        "energy",  "entropy", "interquartile_range", "kurtosis", "maximum", "mean",
        "mean_absolute_deviation", "median", "minimum", "p10", "p90", "range",
        "robust_mean_absolute_deviation", "root_mean_squared", "skewness", "total_energy",
        "uniformity", "variance"};
    static const std::vector<std::string> glcm_names = {
        "autocorrelation", "cluster_prominence", "cluster_shade", "cluster_tendency",
        "contrast", "correlation", "difference_average", "difference_entropy",
        "difference_variance", "id", "idm", "idmn", "idn", "imc1", "imc2",
        "inverse_variance", "joint_average", "joint_energy", "joint_entropy",
        "maximum_probability", "mcc", "sum_average", "sum_entropy", "sum_squares"};
    static const std::vector<std::string> glszm_names = {
        "gray_level_non_uniformity", "gray_level_non_uniformity_normalized",
        "gray_level_variance", "high_gray_level_zone_emphasis", "large_area_emphasis",
        "large_area_high_gray_level_emphasis", "large_area_low_gray_level_emphasis",
        "low_gray_level_zone_emphasis", "size_zone_non_uniformity",
        "size_zone_non_uniformity_normalized", "small_area_emphasis",
        "small_area_high_gray_level_emphasis", "small_area_low_gray_level_emphasis",
        "zone_entropy", "zone_percentage", "zone_variance"};
    switch (f) {
        case Family::shape: return shape_names;
        case Family::firstorder: return firstorder_names;
        case Family::glcm: return glcm_names;
        case Family::glszm: return glszm_names;
    }
    throw std::logic_error("bad family");
}

namespace {

std::vector<double> shape_values(const ShapeFeatures& s) {
    return {s.elongation, s.major_axis_length, s.maximum_diameter,
            s.mesh_surface, s.minor_axis_length, s.perimeter,
            s.perimeter_surface_ratio, s.pixel_surface, s.sphericity};
}

std::vector<double> firstorder_values(const FirstOrderFeatures& s) {
    return {s.energy, s.entropy, s.interquartile_range, s.kurtosis, s.maximum, s.mean,
            s.mean_absolute_deviation, s.median, s.minimum, s.p10, s.p90, s.range,
            s.robust_mean_absolute_deviation, s.root_mean_squared, s.skewness, s.total_energy,
            s.uniformity, s.variance};
}

std::vector<double> glcm_values(const GlcmFeatures& s) {
    return {s.autocorrelation, s.cluster_prominence, s.cluster_shade, s.cluster_tendency,
            s.contrast, s.correlation, s.difference_average, s.difference_entropy,
            s.difference_variance, s.id, s.idm, s.idmn, s.idn, s.imc1, s.imc2,
            s.inverse_variance, s.joint_average, s.joint_energy, s.joint_entropy,
            s.maximum_probability, s.mcc, s.sum_average, s.sum_entropy, s.sum_squares};
}

std::vector<double> glszm_values(const GlszmFeatures& s) {
    return {s.gray_level_non_uniformity, s.gray_level_non_uniformity_normalized,
            s.gray_level_variance, s.high_gray_level_zone_emphasis, s.large_area_emphasis,
            s.large_area_high_gray_level_emphasis, s.large_area_low_gray_level_emphasis,
            s.low_gray_level_zone_emphasis, s.size_zone_non_uniformity,
            s.size_zone_non_uniformity_normalized, s.small_area_emphasis,
            s.small_area_high_gray_level_emphasis, s.small_area_low_gray_level_emphasis,
            s.zone_entropy, s.zone_percentage, s.zone_variance};
}

std::vector<double> in_mask_values(const ImageGrid& image, const BinaryMask& mask) {
    std::vector<double> out;
    out.reserve(256);
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        if (mask.bits[i]) out.push_back(image.values[i]);
    return out;
}

void append_family(FeatureVector& fv, const std::string& roi, Family family,
                   const std::vector<double>& values) {
    const auto& names = feature_names(family);
    if (names.size() != values.size()) throw std::logic_error("feature name/value count mismatch");
    for (std::size_t i = 0; i < names.size(); ++i) {
        fv.keys.push_back({roi, family, names[i]});
        fv.values.push_back(values[i]);
    }
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

const double* FeatureVector::find(const std::string& roi, const std::string& feature) const {
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (keys[i].roi == roi && keys[i].feature == feature) return &values[i];
    return nullptr;
}

FeatureVector extract_features(const ImageGrid& image, const LabelGrid& labels,
                               const std::vector<RoiSpec>& rois, const DiscretizationConfig& cfg,
                               const FamilySelection& select) {
    require_same_geometry(image.geom, labels.geom, "extract_features");
    FeatureVector fv;
    fv.disc = cfg;
    fv.geom = image.geom;

    for (const RoiSpec& roi : rois) {
        BinaryMask value_mask = mask_from_labels(labels, RoiSpec{roi.name, roi.labels, {}});
        BinaryMask shape_mask =
            roi.shape_labels.empty() ? value_mask
                                     : mask_from_labels(labels, RoiSpec{roi.name, roi.shape_labels, {}});
        if (value_mask.pixel_count() == 0 || shape_mask.pixel_count() == 0) {
            fv.absent_rois.push_back(roi.name);
            continue;
        }
        try {
            if (select.shape) append_family(fv, roi.name, Family::shape,
                                            shape_values(compute_shape(shape_mask)));
            if (select.firstorder) {
                std::vector<double> vals = in_mask_values(image, value_mask);
                append_family(fv, roi.name, Family::firstorder,
                              firstorder_values(compute_first_order(vals, image.geom.pixel_area(), cfg)));
            }
            if (select.glcm)
                append_family(fv, roi.name, Family::glcm,
                              glcm_values(glcm_features(build_glcm(image, value_mask, cfg))));
            if (select.glszm)
                append_family(fv, roi.name, Family::glszm,
                              glszm_values(glszm_features(build_glszm(image, value_mask, cfg))));
        } catch (const std::exception&) {
            // extraction error (e.g. single-pixel ROI): flag and continue
            std::erase_if(fv.keys, [&](const FeatureKey& k) { return k.roi == roi.name; });
            fv.values.resize(fv.keys.size());
            fv.absent_rois.push_back(roi.name);
        }
    }
    return fv;
}

CohortMatrix cohort_from_vectors(const std::vector<std::string>& subjects,
                                 const std::vector<FeatureVector>& vectors) {
    if (subjects.size() != vectors.size())
        throw std::invalid_argument("cohort_from_vectors: subject/vector count mismatch");

    std::vector<std::size_t> order(subjects.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return subjects[a] < subjects[b]; });

    // Union schema: ROIs in first-seen order, canonical family/feature order.
    std::vector<std::string> roi_order;
    for (std::size_t i : order)
        for (const auto& k : vectors[i].keys)
            if (std::find(roi_order.begin(), roi_order.end(), k.roi) == roi_order.end())
                roi_order.push_back(k.roi);

    std::vector<FeatureKey> columns;
    for (const auto& roi : roi_order)
        for (Family fam : {Family::shape, Family::firstorder, Family::glcm, Family::glszm})
            for (const auto& name : feature_names(fam)) {
                FeatureKey key{roi, fam, name};
                bool present = false;
                for (std::size_t i : order)
                    if (std::find(vectors[i].keys.begin(), vectors[i].keys.end(), key) !=
                        vectors[i].keys.end()) {
                        present = true;
                        break;
                    }
                if (present) columns.push_back(key);
            }

    CohortMatrix out;
    out.columns = columns;
    if (!vectors.empty()) out.disc = vectors[order[0]].disc;
    for (std::size_t i : order) {
        std::map<FeatureKey, double> have;
        for (std::size_t k = 0; k < vectors[i].keys.size(); ++k)
            have[vectors[i].keys[k]] = vectors[i].values[k];
        std::vector<double> row;
        row.reserve(columns.size());
        bool complete = true;
        for (const auto& col : columns) {
            auto it = have.find(col);
            if (it == have.end()) {
                complete = false;
                break;
            }
            if (std::isnan(it->second))
                throw std::runtime_error("NaN feature value for subject " + subjects[i]);
            row.push_back(it->second);
        }
        if (!complete) {
            out.dropped_subjects.push_back(subjects[i]);
            continue;
        }
        out.subjects.push_back(subjects[i]);
        out.data.insert(out.data.end(), row.begin(), row.end());
    }
    return out;
}

CohortMatrix standardize_against(const CohortMatrix& cohort, const std::vector<double>& mean,
                                 const std::vector<double>& std) {
    if (mean.size() != cohort.columns.size() || std.size() != cohort.columns.size())
        throw std::invalid_argument("standardize_against: stats length mismatch");
    CohortMatrix out = cohort;
    out.standardized = true;
    out.col_mean = mean;
    out.col_std = std;
    out.zero_variance.assign(cohort.columns.size(), 0);
    for (std::size_t c = 0; c < cohort.columns.size(); ++c) {
        if (!(std[c] > 0)) {
            out.zero_variance[c] = 1;
            for (std::size_t r = 0; r < cohort.subjects.size(); ++r) out.at(r, c) = 0.0;
        } else {
            for (std::size_t r = 0; r < cohort.subjects.size(); ++r)
                out.at(r, c) = (cohort.at(r, c) - mean[c]) / std[c];
        }
    }
    return out;
}

CohortMatrix standardize(const CohortMatrix& cohort) {
    const std::size_t nr = cohort.subjects.size(), nc = cohort.columns.size();
    if (nr < 2) throw std::invalid_argument("standardize: need at least 2 rows");
    std::vector<double> mean(nc, 0.0), sd(nc, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        double m = 0;
        for (std::size_t r = 0; r < nr; ++r) m += cohort.at(r, c);
        m /= double(nr);
        double v = 0;
        for (std::size_t r = 0; r < nr; ++r) {
            double d = cohort.at(r, c) - m;
            v += d * d;
        }
        mean[c] = m;
        sd[c] = std::sqrt(v / double(nr));  // population
    }
    return standardize_against(cohort, mean, sd);
}

void write_features(const CohortMatrix& cohort, const std::string& csv_path) {
    std::ostringstream csv;
    csv << "subject,roi,family,feature,value\n";
    for (std::size_t r = 0; r < cohort.subjects.size(); ++r)
        for (std::size_t c = 0; c < cohort.columns.size(); ++c) {
            const auto& k = cohort.columns[c];
            csv << cohort.subjects[r] << ',' << k.roi << ',' << family_name(k.family) << ','
                << k.feature << ',' << format_value(cohort.at(r, c)) << '\n';
        }
    write_file_atomic(csv_path, csv.str());

    json meta;
    meta["format"] = "radsynth-features v1";
    meta["discretization"] = {
        {"mode", cohort.disc.mode == DiscretizationConfig::Mode::fixed_bin_width ? "fixed_bin_width"
                                                                                 : "fixed_bin_count"},
        {"bin_width", cohort.disc.bin_width},
        {"bin_count", cohort.disc.bin_count}};
    meta["subjects"] = cohort.subjects;
    meta["dropped_subjects"] = cohort.dropped_subjects;
    meta["standardized"] = cohort.standardized;
    if (cohort.standardized) {
        json cols = json::array();
        for (std::size_t c = 0; c < cohort.columns.size(); ++c) {
            cols.push_back({{"roi", cohort.columns[c].roi},
                            {"family", family_name(cohort.columns[c].family)},
                            {"feature", cohort.columns[c].feature},
                            {"mean", cohort.col_mean[c]},
                            {"std", cohort.col_std[c]}});
        }
        meta["column_stats"] = cols;
    }
    write_file_atomic(csv_path + ".meta.json", meta.dump(2) + "\n");
}

CohortMatrix read_features(const std::string& csv_path) {
    std::ifstream meta_in(csv_path + ".meta.json");
    if (!meta_in) throw std::runtime_error("missing metadata sidecar: " + csv_path + ".meta.json");
    json meta = json::parse(meta_in);

    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open features CSV: " + csv_path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty features CSV: " + csv_path);
    if (line != "subject,roi,family,feature,value")
        throw std::runtime_error("unexpected features CSV header: " + csv_path);

    std::map<std::string, std::map<FeatureKey, double>> per_subject;
    std::set<std::string> roi_seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string subject, roi, family, feature, value;
        if (!std::getline(ss, subject, ',') || !std::getline(ss, roi, ',') ||
            !std::getline(ss, family, ',') || !std::getline(ss, feature, ',') ||
            !std::getline(ss, value))
            throw std::runtime_error("malformed CSV line " + std::to_string(lineno) + " in " +
                                     csv_path);
        FeatureKey key{roi, family_from_name(family), feature};
        per_subject[subject][key] = std::stod(value);
        roi_seen.insert(roi);
    }
    if (per_subject.empty()) throw std::runtime_error("features CSV has no rows: " + csv_path);
    // lexicographic ROI order: independent of row order in the file
    std::vector<std::string> roi_order(roi_seen.begin(), roi_seen.end());

    std::set<FeatureKey> key_union;
    for (const auto& [subj, kv] : per_subject)
        for (const auto& [k, v] : kv) key_union.insert(k);

    std::vector<FeatureKey> columns;
    for (const auto& roi : roi_order)
        for (Family fam : {Family::shape, Family::firstorder, Family::glcm, Family::glszm})
            for (const auto& name : feature_names(fam)) {
                FeatureKey key{roi, fam, name};
                if (key_union.count(key)) columns.push_back(key);
            }

    CohortMatrix out;
    out.columns = columns;
    const auto& disc = meta.at("discretization");
    out.disc.mode = disc.at("mode").get<std::string>() == "fixed_bin_width"
                        ? DiscretizationConfig::Mode::fixed_bin_width
                        : DiscretizationConfig::Mode::fixed_bin_count;
    out.disc.bin_width = disc.at("bin_width").get<double>();
    out.disc.bin_count = disc.at("bin_count").get<int>();

    for (const auto& [subj, kv] : per_subject) {  // std::map: sorted by subject
        std::vector<double> row;
        row.reserve(columns.size());
        bool complete = true;
        for (const auto& col : columns) {
            auto it = kv.find(col);
            if (it == kv.end()) {
                complete = false;
                break;
            }
            row.push_back(it->second);
        }
        if (!complete) {
            out.dropped_subjects.push_back(subj);
            continue;
        }
        out.subjects.push_back(subj);
        out.data.insert(out.data.end(), row.begin(), row.end());
    }

    if (meta.value("standardized", false)) {
        out.standardized = true;
        out.col_mean.assign(columns.size(), 0.0);
        out.col_std.assign(columns.size(), 0.0);
        out.zero_variance.assign(columns.size(), 0);
        std::map<FeatureKey, std::pair<double, double>> stats;
        for (const auto& cs : meta.at("column_stats"))
            stats[{cs.at("roi").get<std::string>(), family_from_name(cs.at("family").get<std::string>()),
                   cs.at("feature").get<std::string>()}] = {cs.at("mean").get<double>(),
                                                            cs.at("std").get<double>()};
        for (std::size_t c = 0; c < columns.size(); ++c) {
            auto it = stats.find(columns[c]);
            if (it == stats.end())
                throw std::runtime_error("metadata sidecar missing stats for a column: " + csv_path);
            out.col_mean[c] = it->second.first;
            out.col_std[c] = it->second.second;
            out.zero_variance[c] = it->second.second > 0 ? 0 : 1;
        }
    }
    return out;
}

}  // namespace radsynth
