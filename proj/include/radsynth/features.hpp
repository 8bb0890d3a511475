#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radsynth/firstorder.hpp"
#include "radsynth/grid.hpp"
#include "radsynth/mask.hpp"

namespace radsynth {

enum class Family { shape, firstorder, glcm, glszm };

const char* family_name(Family f);                 // "shape", "firstorder", ...
const char* family_display_name(Family f);         // "Shape", "Histogram", ...
Family family_from_name(const std::string& name);

// Canonical per-family feature names, alphabetical. 9 + 18 + 24 + 16 = 67.
const std::vector<std::string>& feature_names(Family f);

struct FeatureKey {
    std::string roi;
    Family family;
    std::string feature;

    bool operator==(const FeatureKey&) const = default;
    auto operator<=>(const FeatureKey&) const = default;
};

// 67 named features per present ROI, in canonical order: ROIs as configured,
// families shape/firstorder/glcm/glszm, alphabetical within family.
struct FeatureVector {
    std::vector<FeatureKey> keys;
    std::vector<double> values;
    std::vector<std::string> absent_rois;  // empty or extraction-failed ROIs
    DiscretizationConfig disc;
    GridGeometry geom;
    std::string source;
    std::uint64_t seed = 0;
    bool has_seed = false;

    const double* find(const std::string& roi, const std::string& feature) const;
};

// Which families to compute; the inverse-synthesis objective asks for the
// subset its targets need.
struct FamilySelection {
    bool shape = true;
    bool firstorder = true;
    bool glcm = true;
    bool glszm = true;
    static FamilySelection all() { return {}; }
};

FeatureVector extract_features(const ImageGrid& image, const LabelGrid& labels,
                               const std::vector<RoiSpec>& rois, const DiscretizationConfig& cfg,
                               const FamilySelection& select = FamilySelection::all());

struct CohortMatrix {
    std::vector<std::string> subjects;   // sorted ascending
    std::vector<FeatureKey> columns;
    std::vector<double> data;            // subjects.size() x columns.size()
    bool standardized = false;
    std::vector<double> col_mean, col_std;      // recorded transform
    std::vector<std::uint8_t> zero_variance;    // flagged constant columns
    std::vector<std::string> dropped_subjects;  // incomplete rows dropped on read
    DiscretizationConfig disc;

    double at(std::size_t row, std::size_t col) const { return data[row * columns.size() + col]; }
    double& at(std::size_t row, std::size_t col) { return data[row * columns.size() + col]; }
};

CohortMatrix cohort_from_vectors(const std::vector<std::string>& subjects,
                                 const std::vector<FeatureVector>& vectors);

// Per-column z-score with population std. Zero-variance columns pass through
// as zeros and are flagged. Requires >= 2 rows.
CohortMatrix standardize(const CohortMatrix& cohort);

// Same transform, but anchored to reference statistics (the real cohort).
CohortMatrix standardize_against(const CohortMatrix& cohort, const std::vector<double>& mean,
                                 const std::vector<double>& std);

// CSV "subject,roi,family,feature,value" plus <path>.meta.json sidecar.
// Values round-trip at 17 significant digits.
void write_features(const CohortMatrix& cohort, const std::string& csv_path);
CohortMatrix read_features(const std::string& csv_path);

}  // namespace radsynth
