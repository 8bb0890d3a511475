#include "radsynth/grid.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace radsynth {

GridGeometry make_geometry(int width, int height, double spacing_x, double spacing_y) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("grid dimensions must be >= 1");
    if (std::int64_t(width) * height > std::int64_t(INT32_MAX))
        throw std::invalid_argument("grid pixel count exceeds 2^31-1");
    if (!(spacing_x > 0) || !(spacing_y > 0) || !std::isfinite(spacing_x) || !std::isfinite(spacing_y))
        throw std::invalid_argument("grid spacing must be strictly positive and finite");
    return GridGeometry{width, height, spacing_x, spacing_y};
}

void require_same_geometry(const GridGeometry& a, const GridGeometry& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": mismatched grid geometry");
}

ImageGrid ImageGrid::zeros(const GridGeometry& g) {
    return ImageGrid{g, std::vector<double>(std::size_t(g.pixel_total()), 0.0)};
}

LabelGrid LabelGrid::zeros(const GridGeometry& g) {
    return LabelGrid{g, std::vector<std::uint8_t>(std::size_t(g.pixel_total()), 0)};
}

static bool legal_label(std::uint8_t v) { return v == 0 || v == 1 || v == 2 || v == 4; }

ImageGrid make_image(const GridGeometry& g, std::vector<double> values) {
    if (std::int64_t(values.size()) != g.pixel_total())
        throw std::invalid_argument("image payload size does not match geometry");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite pixel value in image");
    return ImageGrid{g, std::move(values)};
}

LabelGrid make_labels(const GridGeometry& g, std::vector<std::uint8_t> labels) {
    if (std::int64_t(labels.size()) != g.pixel_total())
        throw std::invalid_argument("label payload size does not match geometry");
    for (std::uint8_t v : labels)
        if (!legal_label(v))
            throw std::invalid_argument("illegal label value " + std::to_string(int(v)) +
                                        " (expected 0, 1, 2 or 4)");
    return LabelGrid{g, std::move(labels)};
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    static std::atomic<unsigned> counter{0};
    fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                          std::to_string(counter.fetch_add(1)));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

// ---- FLATGRID ----

static std::string flatgrid_header(const GridGeometry& g, const char* dtype) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "FLATGRID v1 %d %d %.17g %.17g %s\n", g.width, g.height,
                  g.spacing_x, g.spacing_y, dtype);
    return buf;
}

void save_grid(const ImageGrid& grid, const std::string& path) {
    std::string bytes = flatgrid_header(grid.geom, "f64");
    std::size_t off = bytes.size();
    bytes.resize(off + grid.values.size() * sizeof(double));
    std::memcpy(bytes.data() + off, grid.values.data(), grid.values.size() * sizeof(double));
    write_file_atomic(path, bytes);
}

void save_grid(const LabelGrid& grid, const std::string& path) {
    std::string bytes = flatgrid_header(grid.geom, "u8");
    bytes.append(reinterpret_cast<const char*>(grid.labels.data()), grid.labels.size());
    write_file_atomic(path, bytes);
}

struct FlatgridHeader {
    GridGeometry geom;
    std::string dtype;
    std::size_t header_len = 0;
};

static FlatgridHeader parse_flatgrid_header(const std::string& bytes, const std::string& path) {
    std::size_t nl = bytes.find('\n');
    if (nl == std::string::npos || nl > 200)
        throw std::runtime_error("malformed FLATGRID header in " + path);
    std::istringstream line(bytes.substr(0, nl));
    std::string magic, version, dtype;
    int w = 0, h = 0;
    double sx = 0, sy = 0;
    line >> magic >> version >> w >> h >> sx >> sy >> dtype;
    if (!line || magic != "FLATGRID" || version != "v1" || (dtype != "f64" && dtype != "u8"))
        throw std::runtime_error("malformed FLATGRID header in " + path);
    FlatgridHeader out;
    out.geom = make_geometry(w, h, sx, sy);
    out.dtype = dtype;
    out.header_len = nl + 1;
    return out;
}

static std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- minimal NIfTI-1 (read-only, little-endian, no extensions) ----

namespace {

struct NiftiInfo {
    GridGeometry geom;
    int nz = 1;
    int datatype = 0;
    std::size_t vox_offset = 0;
    double scl_slope = 1, scl_inter = 0;
};

template <typename T>
T read_le(const std::string& b, std::size_t off) {
    T v;
    std::memcpy(&v, b.data() + off, sizeof(T));
    return v;
}

bool looks_like_nifti(const std::string& bytes) {
    if (bytes.size() < 348) return false;
    return read_le<std::int32_t>(bytes, 0) == 348;
}

NiftiInfo parse_nifti_header(const std::string& bytes, const std::string& path) {
    if (read_le<std::int32_t>(bytes, 0) != 348)
        throw std::runtime_error("unsupported NIfTI header (expect little-endian, 348 bytes): " + path);
    const char* magic = bytes.data() + 344;
    if (std::strncmp(magic, "n+1", 3) != 0 && std::strncmp(magic, "ni1", 3) != 0)
        throw std::runtime_error("missing NIfTI magic in " + path);
    if (std::strncmp(magic, "ni1", 3) == 0)
        throw std::runtime_error("two-file NIfTI (.hdr/.img) not supported: " + path);

    std::int16_t dim0 = read_le<std::int16_t>(bytes, 40);
    std::int16_t nx = read_le<std::int16_t>(bytes, 42);
    std::int16_t ny = read_le<std::int16_t>(bytes, 44);
    std::int16_t nz = dim0 >= 3 ? read_le<std::int16_t>(bytes, 46) : 1;
    if (dim0 < 2 || dim0 > 3)
        throw std::runtime_error("NIfTI must be a 2D slice or 3D volume: " + path);

    NiftiInfo info;
    float sx = read_le<float>(bytes, 80);  // pixdim[1]
    float sy = read_le<float>(bytes, 84);  // pixdim[2]
    if (!(sx > 0)) sx = 1.0f;
    if (!(sy > 0)) sy = 1.0f;
    info.geom = make_geometry(nx, ny, sx, sy);
    info.nz = nz < 1 ? 1 : nz;
    info.datatype = read_le<std::int16_t>(bytes, 70);
    float vox = read_le<float>(bytes, 108);
    info.vox_offset = std::size_t(vox < 352 ? 352 : vox);
    float slope = read_le<float>(bytes, 112);
    float inter = read_le<float>(bytes, 116);
    info.scl_slope = slope;
    info.scl_inter = inter;
    return info;
}

std::vector<double> decode_nifti_slice(const std::string& bytes, const NiftiInfo& info, int slice,
                                       const std::string& path) {
    int z = slice;
    if (info.nz == 1 && z < 0) z = 0;
    if (z < 0)
        throw std::runtime_error("3D NIfTI volume requires an explicit slice index: " + path);
    if (z >= info.nz) throw std::runtime_error("slice index out of range: " + path);

    std::size_t n = std::size_t(info.geom.pixel_total());
    std::size_t elem = 0;
    switch (info.datatype) {
        case 2: elem = 1; break;    // uint8
        case 256: elem = 1; break;  // int8
        case 4: elem = 2; break;    // int16
        case 512: elem = 2; break;  // uint16
        case 16: elem = 4; break;   // float32
        case 64: elem = 8; break;   // float64
        default:
            throw std::runtime_error("unsupported NIfTI datatype " + std::to_string(info.datatype) +
                                     " in " + path);
    }
    std::size_t start = info.vox_offset + std::size_t(z) * n * elem;
    if (start + n * elem > bytes.size()) throw std::runtime_error("truncated NIfTI payload: " + path);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t off = start + i * elem;
        double v = 0;
        switch (info.datatype) {
            case 2: v = double(read_le<std::uint8_t>(bytes, off)); break;
            case 256: v = double(read_le<std::int8_t>(bytes, off)); break;
            case 4: v = double(read_le<std::int16_t>(bytes, off)); break;
            case 512: v = double(read_le<std::uint16_t>(bytes, off)); break;
            case 16: v = double(read_le<float>(bytes, off)); break;
            case 64: v = read_le<double>(bytes, off); break;
        }
        if (info.scl_slope != 0 && !(info.scl_slope == 1 && info.scl_inter == 0))
            v = v * info.scl_slope + info.scl_inter;
        out[i] = v;
    }
    return out;
}

}  // namespace

ImageGrid load_image(const std::string& path, int slice) {
    std::string bytes = slurp(path);
    if (bytes.rfind("FLATGRID", 0) == 0) {
        FlatgridHeader h = parse_flatgrid_header(bytes, path);
        std::size_t n = std::size_t(h.geom.pixel_total());
        if (h.dtype == "f64") {
            if (bytes.size() - h.header_len != n * sizeof(double))
                throw std::runtime_error("FLATGRID payload size mismatch in " + path);
            std::vector<double> vals(n);
            std::memcpy(vals.data(), bytes.data() + h.header_len, n * sizeof(double));
            return make_image(h.geom, std::move(vals));
        }
        if (bytes.size() - h.header_len != n)
            throw std::runtime_error("FLATGRID payload size mismatch in " + path);
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i)
            vals[i] = double(std::uint8_t(bytes[h.header_len + i]));
        return make_image(h.geom, std::move(vals));
    }
    if (looks_like_nifti(bytes)) {
        NiftiInfo info = parse_nifti_header(bytes, path);
        return make_image(info.geom, decode_nifti_slice(bytes, info, slice, path));
    }
    throw std::runtime_error("unrecognized grid format: " + path);
}

LabelGrid load_labels(const std::string& path, int slice) {
    std::string bytes = slurp(path);
    std::vector<double> vals;
    GridGeometry geom;
    if (bytes.rfind("FLATGRID", 0) == 0) {
        FlatgridHeader h = parse_flatgrid_header(bytes, path);
        geom = h.geom;
        std::size_t n = std::size_t(geom.pixel_total());
        if (h.dtype == "u8") {
            if (bytes.size() - h.header_len != n)
                throw std::runtime_error("FLATGRID payload size mismatch in " + path);
            std::vector<std::uint8_t> labels(n);
            std::memcpy(labels.data(), bytes.data() + h.header_len, n);
            return make_labels(geom, std::move(labels));
        }
        if (bytes.size() - h.header_len != n * sizeof(double))
            throw std::runtime_error("FLATGRID payload size mismatch in " + path);
        vals.resize(n);
        std::memcpy(vals.data(), bytes.data() + h.header_len, n * sizeof(double));
    } else if (looks_like_nifti(bytes)) {
        NiftiInfo info = parse_nifti_header(bytes, path);
        geom = info.geom;
        vals = decode_nifti_slice(bytes, info, slice, path);
    } else {
        throw std::runtime_error("unrecognized grid format: " + path);
    }
    std::vector<std::uint8_t> labels(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        double v = vals[i];
        if (!(v == 0 || v == 1 || v == 2 || v == 4))
            throw std::runtime_error("illegal label value in " + path);
        labels[i] = std::uint8_t(v);
    }
    return make_labels(geom, std::move(labels));
}

void save_pgm(const ImageGrid& image, const std::string& path, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("save_pgm: window lo must be < hi");
    char head[96];
    std::snprintf(head, sizeof head, "P5\n%d %d\n255\n", image.geom.width, image.geom.height);
    std::string bytes(head);
    bytes.reserve(bytes.size() + image.values.size());
    for (double v : image.values) {
        double t = (v - lo) / (hi - lo);
        t = t < 0 ? 0 : (t > 1 ? 1 : t);
        bytes.push_back(char(std::uint8_t(std::lround(255.0 * t))));
    }
    write_file_atomic(path, bytes);
}

}  // namespace radsynth
