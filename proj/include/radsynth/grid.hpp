#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace radsynth {

// Physical-spaced 2D raster geometry. Spacing is mm per pixel.
struct GridGeometry {
    int width = 0;
    int height = 0;
    double spacing_x = 1.0;
    double spacing_y = 1.0;

    std::int64_t pixel_total() const { return std::int64_t(width) * height; }
    double pixel_area() const { return spacing_x * spacing_y; }
    double extent_x() const { return width * spacing_x; }
    double extent_y() const { return height * spacing_y; }

    bool operator==(const GridGeometry&) const = default;
};

// Throws std::invalid_argument on non-positive sizes/spacings or overflow.
GridGeometry make_geometry(int width, int height, double spacing_x, double spacing_y);

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what);

struct ImageGrid {
    GridGeometry geom;
    std::vector<double> values;  // row-major, height*width, finite

    double at(int row, int col) const { return values[std::size_t(row) * geom.width + col]; }
    double& at(int row, int col) { return values[std::size_t(row) * geom.width + col]; }

    static ImageGrid zeros(const GridGeometry& g);
};

// BraTS label convention: 0 background, 1 necrotic, 2 edema, 4 enhancing.
struct LabelGrid {
    GridGeometry geom;
    std::vector<std::uint8_t> labels;

    std::uint8_t at(int row, int col) const { return labels[std::size_t(row) * geom.width + col]; }
    std::uint8_t& at(int row, int col) { return labels[std::size_t(row) * geom.width + col]; }

    static LabelGrid zeros(const GridGeometry& g);
};

ImageGrid make_image(const GridGeometry& g, std::vector<double> values);
LabelGrid make_labels(const GridGeometry& g, std::vector<std::uint8_t> labels);

// Readers sniff the format: FLATGRID v1 or a raw NIfTI-1 file (.nii). For a
// 3D NIfTI volume `slice` selects the axial plane; pass -1 for 2D inputs.
ImageGrid load_image(const std::string& path, int slice = -1);
LabelGrid load_labels(const std::string& path, int slice = -1);

// FLATGRID v1: ASCII header "FLATGRID v1 <w> <h> <sx> <sy> <dtype>\n" then a
// raw little-endian row-major payload (f64 for images, u8 for labels).
void save_grid(const ImageGrid& grid, const std::string& path);
void save_grid(const LabelGrid& grid, const std::string& path);

// Binary 8-bit PGM (P5); value = round(255*clamp((x-lo)/(hi-lo),0,1)).
void save_pgm(const ImageGrid& image, const std::string& path, double lo, double hi);

// Atomic text/binary file write (temp file + rename), shared by all writers.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace radsynth
