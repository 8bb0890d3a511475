#include "radsynth/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace radsynth {

// Cell corner bits: 1 = (cx,cy), 2 = (cx+1,cy), 4 = (cx+1,cy+1), 8 = (cx,cy+1).
// Segments are oriented with the mask on the right of travel (y grows down),
// which makes outer loops positive under the shoelace formula and holes
// negative. Saddles (5, 10) emit the diagonal-connecting pair.
BoundaryMesh boundary_mesh(const BinaryMask& mask) {
    const int w = mask.geom.width, h = mask.geom.height;
    const double sx = mask.geom.spacing_x, sy = mask.geom.spacing_y;
    if (mask.pixel_count() == 0) throw std::invalid_argument("boundary_mesh: empty mask");

    auto inside = [&](int col, int row) {
        return col >= 0 && col < w && row >= 0 && row < h && mask.at(row, col);
    };

    // Vertex ids name the pixel-pair edge whose midpoint they sit on.
    const std::int64_t stride = w + 2;
    auto hid = [&](int col, int row) { return 2 * (std::int64_t(row + 1) * stride + (col + 1)); };
    auto vid = [&](int col, int row) { return 2 * (std::int64_t(row + 1) * stride + (col + 1)) + 1; };
    auto coords = [&](std::int64_t id) -> std::array<double, 2> {
        bool vertical = (id & 1) != 0;
        std::int64_t q = id >> 1;
        int row = int(q / stride) - 1;
        int col = int(q % stride) - 1;
        if (vertical) return {(col + 0.5) * sx, (row + 1.0) * sy};
        return {(col + 1.0) * sx, (row + 0.5) * sy};
    };

    struct Seg {
        std::int64_t from, to;
    };
    std::vector<Seg> segs;
    segs.reserve(std::size_t(mask.pixel_count()) / 2 + 16);

    for (int cy = -1; cy <= h - 1; ++cy) {
        for (int cx = -1; cx <= w - 1; ++cx) {
            int code = (inside(cx, cy) ? 1 : 0) | (inside(cx + 1, cy) ? 2 : 0) |
                       (inside(cx + 1, cy + 1) ? 4 : 0) | (inside(cx, cy + 1) ? 8 : 0);
            if (code == 0 || code == 15) continue;
            std::int64_t T = hid(cx, cy), B = hid(cx, cy + 1), L = vid(cx, cy), R = vid(cx + 1, cy);
            switch (code) {
                case 1: segs.push_back({T, L}); break;
                case 2: segs.push_back({R, T}); break;
                case 3: segs.push_back({R, L}); break;
                case 4: segs.push_back({B, R}); break;
                case 5: segs.push_back({T, R}); segs.push_back({B, L}); break;
                case 6: segs.push_back({B, T}); break;
                case 7: segs.push_back({B, L}); break;
                case 8: segs.push_back({L, B}); break;
                case 9: segs.push_back({T, B}); break;
                case 10: segs.push_back({L, T}); segs.push_back({R, B}); break;
                case 11: segs.push_back({R, B}); break;
                case 12: segs.push_back({L, R}); break;
                case 13: segs.push_back({T, R}); break;
                case 14: segs.push_back({L, T}); break;
            }
        }
    }

    std::unordered_map<std::int64_t, std::size_t> by_from;
    by_from.reserve(segs.size() * 2);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (!by_from.emplace(segs[i].from, i).second)
            throw std::logic_error("boundary_mesh: inconsistent contour topology");
    }

    BoundaryMesh mesh;
    std::vector<bool> visited(segs.size(), false);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (visited[i]) continue;
        std::vector<std::array<double, 2>> loop;
        std::size_t cur = i;
        const std::int64_t start = segs[i].from;
        while (true) {
            visited[cur] = true;
            loop.push_back(coords(segs[cur].from));
            std::int64_t next = segs[cur].to;
            if (next == start) break;
            auto it = by_from.find(next);
            if (it == by_from.end() || visited[it->second])
                throw std::logic_error("boundary_mesh: open contour chain");
            cur = it->second;
        }
        mesh.loops.push_back(std::move(loop));
    }
    return mesh;
}

static double loop_signed_area(const std::vector<std::array<double, 2>>& loop) {
    double s = 0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = loop[i];
        const auto& q = loop[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return s / 2;
}

double mesh_signed_area(const BoundaryMesh& mesh) {
    double s = 0;
    for (const auto& loop : mesh.loops) s += loop_signed_area(loop);
    return s;
}

double mesh_perimeter(const BoundaryMesh& mesh) {
    double s = 0;
    for (const auto& loop : mesh.loops) {
        const std::size_t n = loop.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = loop[i];
            const auto& q = loop[(i + 1) % n];
            s += std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]));
        }
    }
    return s;
}

double maximum_diameter(const BoundaryMesh& mesh) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& loop : mesh.loops) pts.insert(pts.end(), loop.begin(), loop.end());
    if (pts.empty()) throw std::invalid_argument("maximum_diameter: empty mesh");

    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() == 1) return 0;

    // Andrew monotone chain; the farthest pair lies on the hull.
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);

    double best = 0;
    for (std::size_t i = 0; i < hull.size(); ++i)
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            double dx = hull[i][0] - hull[j][0], dy = hull[i][1] - hull[j][1];
            best = std::max(best, dx * dx + dy * dy);
        }
    return std::sqrt(best);
}

}  // namespace radsynth
