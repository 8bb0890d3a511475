#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radsynth/grid.hpp"

namespace radsynth {

// ROI selection over BraTS labels. `labels` drives intensity/texture features;
// `shape_labels`, when non-empty, selects the mask used for shape features
// (ROI2 takes its shape from the necrotic+enhancing union).
struct RoiSpec {
    std::string name;
    std::vector<std::uint8_t> labels;
    std::vector<std::uint8_t> shape_labels;  // empty -> same as labels
};

// ROI1 = necrotic {1}; ROI2 = enhancing {4} with shape from {1,4}.
std::vector<RoiSpec> default_rois();

struct BinaryMask {
    GridGeometry geom;
    std::vector<std::uint8_t> bits;  // 0/1, row-major

    bool at(int row, int col) const { return bits[std::size_t(row) * geom.width + col] != 0; }
    void set(int row, int col, bool v) { bits[std::size_t(row) * geom.width + col] = v ? 1 : 0; }
    std::int64_t pixel_count() const;
    bool empty() const { return pixel_count() == 0; }

    static BinaryMask zeros(const GridGeometry& g);
};

BinaryMask mask_from_labels(const LabelGrid& labels, const RoiSpec& roi);

// Maximal connected sets of true pixels, sorted by (size desc, min row-major
// index asc). connectivity is 4 or 8.
std::vector<BinaryMask> connected_components(const BinaryMask& mask, int connectivity);

// Pixel true iff its center is within diameter/2 of (cx,cy), physical mm.
// Throws if the clipped disk is empty.
BinaryMask circular_mask(const GridGeometry& geom, double cx, double cy, double diameter);

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
std::pair<double, double> mask_centroid(const BinaryMask& mask);  // physical mm

}  // namespace radsynth
