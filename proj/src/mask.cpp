#include "radsynth/mask.hpp"

#include <algorithm>
#include <stdexcept>

namespace radsynth {

std::vector<RoiSpec> default_rois() {
    return {
        RoiSpec{"ROI1", {1}, {}},
        RoiSpec{"ROI2", {4}, {1, 4}},
    };
}

std::int64_t BinaryMask::pixel_count() const {
    std::int64_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

BinaryMask BinaryMask::zeros(const GridGeometry& g) {
    return BinaryMask{g, std::vector<std::uint8_t>(std::size_t(g.pixel_total()), 0)};
}

BinaryMask mask_from_labels(const LabelGrid& labels, const RoiSpec& roi) {
    BinaryMask out = BinaryMask::zeros(labels.geom);
    bool wanted[8] = {};
    for (std::uint8_t v : roi.labels) {
        if (v != 1 && v != 2 && v != 4)
            throw std::invalid_argument("RoiSpec labels must be a subset of {1,2,4}");
        wanted[v] = true;
    }
    if (roi.labels.empty()) throw std::invalid_argument("RoiSpec needs at least one label");
    const std::size_t n = labels.labels.size();
    for (std::size_t i = 0; i < n; ++i)
        if (wanted[labels.labels[i]]) out.bits[i] = 1;
    return out;
}

std::vector<BinaryMask> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("connectivity must be 4 or 8");
    const int w = mask.geom.width, h = mask.geom.height;
    const std::size_t n = mask.bits.size();
    std::vector<std::int32_t> comp(n, -1);

    static const int dr4[] = {-1, 0, 0, 1};
    static const int dc4[] = {0, -1, 1, 0};
    static const int dr8[] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static const int dc8[] = {-1, 0, 1, -1, 1, -1, 0, 1};
    const int* dr = connectivity == 4 ? dr4 : dr8;
    const int* dc = connectivity == 4 ? dc4 : dc8;
    const int nd = connectivity;

    struct Info {
        std::int64_t size;
        std::size_t first;
        std::int32_t id;
    };
    std::vector<Info> infos;
    std::vector<std::size_t> stack;

    std::int32_t next_id = 0;
    for (std::size_t start = 0; start < n; ++start) {
        if (!mask.bits[start] || comp[start] >= 0) continue;
        std::int64_t size = 0;
        stack.clear();
        stack.push_back(start);
        comp[start] = next_id;
        while (!stack.empty()) {
            std::size_t p = stack.back();
            stack.pop_back();
            ++size;
            int r = int(p / w), c = int(p % w);
            for (int k = 0; k < nd; ++k) {
                int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                std::size_t q = std::size_t(rr) * w + cc;
                if (mask.bits[q] && comp[q] < 0) {
                    comp[q] = next_id;
                    stack.push_back(q);
                }
            }
        }
        infos.push_back({size, start, next_id});
        ++next_id;
    }

    std::sort(infos.begin(), infos.end(), [](const Info& a, const Info& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.first < b.first;
    });

    std::vector<std::int32_t> order(infos.size());
    for (std::size_t i = 0; i < infos.size(); ++i) order[std::size_t(infos[i].id)] = std::int32_t(i);

    std::vector<BinaryMask> out(infos.size(), BinaryMask::zeros(mask.geom));
    for (std::size_t i = 0; i < n; ++i)
        if (comp[i] >= 0) out[std::size_t(order[std::size_t(comp[i])])].bits[i] = 1;
    return out;
}

BinaryMask circular_mask(const GridGeometry& geom, double cx, double cy, double diameter) {
    if (!(diameter > 0)) throw std::invalid_argument("circular_mask: diameter must be > 0");
    BinaryMask out = BinaryMask::zeros(geom);
    const double r2 = (diameter / 2) * (diameter / 2);
    std::int64_t count = 0;
    for (int row = 0; row < geom.height; ++row) {
        double py = (row + 0.5) * geom.spacing_y;
        for (int col = 0; col < geom.width; ++col) {
            double px = (col + 0.5) * geom.spacing_x;
            double dx = px - cx, dy = py - cy;
            if (dx * dx + dy * dy <= r2) {
                out.bits[std::size_t(row) * geom.width + col] = 1;
                ++count;
            }
        }
    }
    if (count == 0) throw std::invalid_argument("circular_mask: disk lies entirely outside the grid");
    return out;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
    require_same_geometry(a.geom, b.geom, "mask_union");
    BinaryMask out = a;
    for (std::size_t i = 0; i < out.bits.size(); ++i)
        if (b.bits[i]) out.bits[i] = 1;
    return out;
}

std::pair<double, double> mask_centroid(const BinaryMask& mask) {
    double sx = 0, sy = 0;
    std::int64_t n = 0;
    for (int row = 0; row < mask.geom.height; ++row)
        for (int col = 0; col < mask.geom.width; ++col)
            if (mask.at(row, col)) {
                sx += (col + 0.5) * mask.geom.spacing_x;
                sy += (row + 0.5) * mask.geom.spacing_y;
                ++n;
            }
    if (n == 0) throw std::invalid_argument("mask_centroid: empty mask");
    return {sx / double(n), sy / double(n)};
}

}  // namespace radsynth
