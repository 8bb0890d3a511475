// radsynth: batch pipeline for radiomics extraction, feature-conditioned
// tumor synthesis, tumor removal and cohort similarity evaluation.
//
// Exit codes: 0 success, 1 usage/input error, 2 empty result.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "radsynth/features.hpp"
#include "radsynth/grid.hpp"
#include "radsynth/mask.hpp"
#include "radsynth/rng.hpp"
#include "radsynth/stats.hpp"
#include "radsynth/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace radsynth;

namespace {

struct Options {
    std::string config_path;
    std::string manifest, image, labels, background, target, real_csv, synth_csv;
    std::string subject = "subject";
    std::string out = "out";
    std::string noise = "on";
    std::string pairing = "flattened";
    std::string surfaces, sphericities, center;
    double bin_width = 25.0;
    int bin_count = 0;  // 0 = fixed bin width mode
    int slice = -1;
    int jobs = 0;
    int count = 1;
    int width = 128, height = 128;
    double spacing = 1.0;
    std::uint64_t seed = 1;
    long budget = 5000;
    int permutation = 0;
    double mask_scale = 1.15;
};

void merge_config_file(Options& o, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);
    if (j.contains("bin_width")) o.bin_width = j["bin_width"].get<double>();
    if (j.contains("bin_count")) o.bin_count = j["bin_count"].get<int>();
    if (j.contains("slice")) o.slice = j["slice"].get<int>();
    if (j.contains("jobs")) o.jobs = j["jobs"].get<int>();
    if (j.contains("seed")) o.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("budget")) o.budget = j["budget"].get<long>();
    if (j.contains("count")) o.count = j["count"].get<int>();
    if (j.contains("width")) o.width = j["width"].get<int>();
    if (j.contains("height")) o.height = j["height"].get<int>();
    if (j.contains("spacing")) o.spacing = j["spacing"].get<double>();
    if (j.contains("noise")) o.noise = j["noise"].get<std::string>();
    if (j.contains("pairing")) o.pairing = j["pairing"].get<std::string>();
    if (j.contains("permutation")) o.permutation = j["permutation"].get<int>();
    if (j.contains("mask_scale")) o.mask_scale = j["mask_scale"].get<double>();
}

DiscretizationConfig disc_of(const Options& o) {
    DiscretizationConfig d;
    if (o.bin_count > 0) {
        d.mode = DiscretizationConfig::Mode::fixed_bin_count;
        d.bin_count = o.bin_count;
    } else {
        d.mode = DiscretizationConfig::Mode::fixed_bin_width;
        d.bin_width = o.bin_width;
    }
    return d;
}

void apply_jobs(const Options& o) {
#ifdef _OPENMP
    if (o.jobs > 0) omp_set_num_threads(o.jobs);
#endif
}

void archive_config(const Options& o, const std::string& command, const fs::path& dir) {
    json j;
    j["command"] = command;
    j["seed"] = o.seed;
    j["jobs"] = o.jobs;
    j["bin_width"] = o.bin_width;
    j["bin_count"] = o.bin_count;
    j["slice"] = o.slice;
    if (command == "synthesize" || command == "grid") {
        j["budget"] = o.budget;
        j["center"] = o.center;
    }
    if (command == "grid") {
        j["surfaces"] = o.surfaces;
        j["sphericities"] = o.sphericities;
    }
    if (command == "phantom") {
        j["count"] = o.count;
        j["width"] = o.width;
        j["height"] = o.height;
        j["spacing"] = o.spacing;
    }
    if (command == "remove") j["noise"] = o.noise;
    if (command == "evaluate") {
        j["pairing"] = o.pairing;
        j["permutation"] = o.permutation;
    }
    write_file_atomic((dir / "config.json").string(), j.dump(2) + "\n");
}

std::pair<double, double> parse_center(const std::string& text, const GridGeometry& geom) {
    if (text.empty()) return {geom.extent_x() / 2, geom.extent_y() / 2};
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw std::runtime_error("--center expects \"x,y\" in mm");
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

struct ManifestRow {
    std::string subject, image_path, labels_path;
};

std::vector<ManifestRow> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path);
    fs::path base = fs::path(path).parent_path();
    std::vector<ManifestRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line == "subject,image_path,labels_path") {
            first = false;
            continue;
        }
        first = false;
        std::istringstream ss(line);
        ManifestRow row;
        if (!std::getline(ss, row.subject, ',') || !std::getline(ss, row.image_path, ',') ||
            !std::getline(ss, row.labels_path))
            throw std::runtime_error("malformed manifest line: " + line);
        if (!row.image_path.empty() && fs::path(row.image_path).is_relative())
            row.image_path = (base / row.image_path).string();
        if (!row.labels_path.empty() && fs::path(row.labels_path).is_relative())
            row.labels_path = (base / row.labels_path).string();
        rows.push_back(row);
    }
    return rows;
}

std::string trace_json(const SynthesisResult& res) {
    json j;
    j["seed"] = res.seed;
    j["objective"] = res.objective;
    j["evaluations"] = res.evaluations;
    json tr = json::array();
    for (const auto& [ev, obj] : res.trace) tr.push_back({{"evaluation", ev}, {"objective", obj}});
    j["improvements"] = tr;
    j["params"] = {{"cx", res.params.cx},        {"cy", res.params.cy},
                   {"r0", res.params.r0},        {"core_ratio", res.params.core_ratio},
                   {"mu_ncr", res.params.mu_ncr}, {"mu_et", res.params.mu_et},
                   {"sigma_tex", res.params.sigma_tex}, {"smooth_px", res.params.smooth_px},
                   {"a", res.params.a},          {"b", res.params.b}};
    return j.dump(2) + "\n";
}

// ---- subcommands ----

int cmd_phantom(const Options& o) {
    if (o.count < 1) throw std::runtime_error("--count must be >= 1");
    apply_jobs(o);
    fs::create_directories(o.out);
    GridGeometry geom = make_geometry(o.width, o.height, o.spacing, o.spacing);

    std::vector<std::string> names(static_cast<std::size_t>(o.count));
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < o.count; ++i) {
        auto [image, labels] = make_phantom(o.seed + std::uint64_t(i), geom);
        char buf[64];
        std::snprintf(buf, sizeof buf, "subj_%03d", i);
        names[std::size_t(i)] = buf;
        save_grid(image, (fs::path(o.out) / (std::string(buf) + "_image.fg")).string());
        save_grid(labels, (fs::path(o.out) / (std::string(buf) + "_labels.fg")).string());
    }

    std::ostringstream manifest;
    manifest << "subject,image_path,labels_path\n";
    for (const auto& n : names) manifest << n << ',' << n << "_image.fg," << n << "_labels.fg\n";
    write_file_atomic((fs::path(o.out) / "manifest.csv").string(), manifest.str());
    archive_config(o, "phantom", o.out);
    std::cout << "wrote " << o.count << " phantoms to " << o.out << "\n";
    return 0;
}

int cmd_extract(const Options& o) {
    apply_jobs(o);
    fs::create_directories(o.out);
    std::vector<ManifestRow> rows;
    if (!o.manifest.empty()) {
        rows = read_manifest(o.manifest);
    } else {
        if (o.image.empty() || o.labels.empty())
            throw std::runtime_error("extract needs --manifest or both --image and --labels");
        rows.push_back({o.subject, o.image, o.labels});
    }
    if (rows.empty()) {
        std::cerr << "extract: empty manifest\n";
        return 2;
    }

    const DiscretizationConfig disc = disc_of(o);
    const std::vector<RoiSpec> rois = default_rois();
    std::vector<FeatureVector> vectors(rows.size());
    std::vector<std::string> subjects(rows.size());
    std::vector<std::string> errors(rows.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < rows.size(); ++i) {
        subjects[i] = rows[i].subject;
        try {
            ImageGrid image = load_image(rows[i].image_path, o.slice);
            LabelGrid labels = load_labels(rows[i].labels_path, o.slice);
            vectors[i] = extract_features(image, labels, rois, disc);
            vectors[i].source = rows[i].subject;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }

    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!errors[i].empty())
            std::cerr << "extract: subject " << subjects[i] << " failed: " << errors[i] << "\n";
        for (const auto& roi : vectors[i].absent_rois)
            std::cerr << "extract: subject " << subjects[i] << ": ROI " << roi
                      << " absent or unextractable\n";
    }

    CohortMatrix cohort = cohort_from_vectors(subjects, vectors);
    cohort.disc = disc;
    write_features(cohort, (fs::path(o.out) / "features.csv").string());
    archive_config(o, "extract", o.out);
    std::cout << "extracted " << cohort.subjects.size() << "/" << rows.size() << " subjects, "
              << cohort.columns.size() << " features each\n";
    return cohort.subjects.empty() ? 2 : 0;
}

int cmd_synthesize(const Options& o) {
    apply_jobs(o);
    fs::create_directories(o.out);
    ImageGrid background = load_image(o.background, o.slice);
    std::ifstream tin(o.target);
    if (!tin) throw std::runtime_error("cannot open target spec: " + o.target);
    std::stringstream tbuf;
    tbuf << tin.rdbuf();
    TargetSpec spec = target_spec_from_json(tbuf.str());
    auto [cx, cy] = parse_center(o.center, background.geom);

    SynthesisResult res = synthesize(background, cx, cy, spec, o.seed, o.budget);

    save_grid(res.image, (fs::path(o.out) / "image.fg").string());
    save_grid(res.labels, (fs::path(o.out) / "labels.fg").string());
    CohortMatrix achieved = cohort_from_vectors({"synthetic"}, {res.achieved});
    achieved.disc = res.achieved.disc;
    write_features(achieved, (fs::path(o.out) / "achieved.csv").string());
    write_file_atomic((fs::path(o.out) / "trace.json").string(), trace_json(res));
    archive_config(o, "synthesize", o.out);
    std::cout << "objective " << res.objective << " after " << res.evaluations << " evaluations\n";
    return 0;
}

int cmd_remove(const Options& o) {
    apply_jobs(o);
    ImageGrid image = load_image(o.image, o.slice);
    LabelGrid labels = load_labels(o.labels, o.slice);
    SynthesisResult res =
        replace_tumor(image, labels, 0, 0, nullptr, o.seed, 1, o.noise != "off");
    fs::path out(o.out);
    if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
    save_grid(res.image, o.out);
    archive_config(o, "remove", out.parent_path().empty() ? fs::path(".") : out.parent_path());
    std::cout << "filled tumor region -> " << o.out << "\n";
    return 0;
}

int cmd_evaluate(const Options& o) {
    apply_jobs(o);
    fs::create_directories(o.out);
    CohortMatrix real = read_features(o.real_csv);
    CohortMatrix synth = read_features(o.synth_csv);
    Pairing pairing;
    if (o.pairing == "flattened")
        pairing = Pairing::flattened;
    else if (o.pairing == "per-feature")
        pairing = Pairing::per_feature;
    else
        throw std::runtime_error("--pairing must be flattened or per-feature");

    SimilarityReport report = family_report(real, synth, pairing, o.permutation, o.seed);
    write_report_csv(report, (fs::path(o.out) / "report.csv").string());
    std::string table = render_report_table(report);
    write_file_atomic((fs::path(o.out) / "report.txt").string(), table);
    archive_config(o, "evaluate", o.out);
    std::cout << table;
    return 0;
}

int cmd_grid(const Options& o) {
    apply_jobs(o);
    fs::create_directories(o.out);
    ImageGrid background = load_image(o.background, o.slice);
    std::vector<double> surfaces = parse_list(o.surfaces);
    std::vector<double> sphericities = parse_list(o.sphericities);
    if (surfaces.empty() || sphericities.empty())
        throw std::runtime_error("grid needs non-empty --surfaces and --sphericities");
    for (double s : surfaces)
        if (!(s > 0)) throw std::runtime_error("surface targets must be positive");
    for (double s : sphericities)
        if (!(s > 0 && s <= 1)) throw std::runtime_error("sphericity targets must be in (0, 1]");
    std::sort(surfaces.begin(), surfaces.end());
    std::sort(sphericities.begin(), sphericities.end());

    auto [cx, cy] = parse_center(o.center, background.geom);
    const int ncol = int(surfaces.size()), nrow = int(sphericities.size());
    const int ncell = nrow * ncol;

    struct Cell {
        bool ok = false;
        ImageGrid image;
        double achieved_surface = 0, achieved_sphericity = 0, objective = 0;
        long evaluations = 0;
        std::string error;
    };
    std::vector<Cell> cells(static_cast<std::size_t>(ncell));

#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < ncell; ++idx) {
        int row = idx / ncol, col = idx % ncol;
        double surface = surfaces[std::size_t(col)];
        double sphericity = sphericities[std::size_t(row)];
        TargetSpec spec;
        // irregular cells reach further out; give the circle room for them
        spec.mask_diameter =
            (3.0 + 1.2 * std::max(0.0, 0.9 - sphericity)) * std::sqrt(surface / M_PI);
        spec.targets = {
            {"ROI2", "pixel_surface", surface, 1.0, 0.10 * surface},
            {"ROI2", "sphericity", sphericity, 1.0, 0.05},
        };
        Cell& cell = cells[std::size_t(idx)];
        try {
            SynthesisResult res =
                synthesize(background, cx, cy, spec, hash_at(o.seed, std::uint64_t(idx)), o.budget);
            cell.ok = true;
            cell.image = std::move(res.image);
            if (const double* v = res.achieved.find("ROI2", "pixel_surface"))
                cell.achieved_surface = *v;
            if (const double* v = res.achieved.find("ROI2", "sphericity"))
                cell.achieved_sphericity = *v;
            cell.objective = res.objective;
            cell.evaluations = res.evaluations;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    }

    // window over all successful tiles
    double lo = background.values[0], hi = background.values[0];
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        for (double v : cell.image.values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(lo < hi)) {
        lo = 0;
        hi = 1;
    }

    const int tw = background.geom.width, th = background.geom.height, sep = 2;
    GridGeometry mg = make_geometry(ncol * tw + (ncol - 1) * sep, nrow * th + (nrow - 1) * sep,
                                    background.geom.spacing_x, background.geom.spacing_y);
    ImageGrid montage = ImageGrid::zeros(mg);
    for (double& v : montage.values) v = hi;  // separator lines render white
    for (int row = 0; row < nrow; ++row)
        for (int col = 0; col < ncol; ++col) {
            const Cell& cell = cells[std::size_t(row) * ncol + std::size_t(col)];
            int or_ = row * (th + sep), oc = col * (tw + sep);
            for (int r = 0; r < th; ++r)
                for (int c = 0; c < tw; ++c) {
                    double v;
                    if (cell.ok)
                        v = cell.image.at(r, c);
                    else
                        v = ((r / 8 + c / 8) % 2 == 0) ? lo : hi;  // failed tile: checkerboard
                    montage.at(or_ + r, oc + c) = v;
                }
        }
    save_pgm(montage, (fs::path(o.out) / "montage.pgm").string(), lo, hi);

    std::ostringstream csv;
    csv << "row,col,target_surface,target_sphericity,achieved_surface,achieved_sphericity,"
           "objective,evaluations,status\n";
    int ok_count = 0;
    for (int row = 0; row < nrow; ++row)
        for (int col = 0; col < ncol; ++col) {
            const Cell& cell = cells[std::size_t(row) * ncol + std::size_t(col)];
            char buf[256];
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%s\n", row, col,
                          surfaces[std::size_t(col)], sphericities[std::size_t(row)],
                          cell.achieved_surface, cell.achieved_sphericity, cell.objective,
                          cell.evaluations, cell.ok ? "ok" : "failed");
            csv << buf;
            if (cell.ok) ++ok_count;
        }
    write_file_atomic((fs::path(o.out) / "cells.csv").string(), csv.str());
    archive_config(o, "grid", o.out);
    std::cout << ok_count << "/" << ncell << " cells synthesized\n";
    return ok_count * 2 >= ncell ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;

    // config file first, flags win
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") o.config_path = argv[i + 1];
    try {
        if (!o.config_path.empty()) merge_config_file(o, o.config_path);
    } catch (const std::exception& e) {
        std::cerr << "radsynth: " << e.what() << "\n";
        return 1;
    }

    CLI::App app{"radiomics feature extraction and feature-conditioned tumor synthesis"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "JSON config file (flags win)");
        cmd->add_option("--jobs", o.jobs, "worker threads (0 = library default)");
        cmd->add_option("--seed", o.seed, "random seed");
        cmd->add_option("--out", o.out, "output directory or file");
        cmd->add_option("--slice", o.slice, "axial slice index for 3D NIfTI inputs");
        cmd->add_option("--bin-width", o.bin_width, "discretization bin width");
        cmd->add_option("--bin-count", o.bin_count, "fixed bin count mode when > 0");
    };

    CLI::App* extract = app.add_subcommand("extract", "extract feature vectors from image+labels");
    extract->add_option("--manifest", o.manifest, "CSV: subject,image_path,labels_path");
    extract->add_option("--image", o.image, "single image path");
    extract->add_option("--labels", o.labels, "single labels path");
    extract->add_option("--subject", o.subject, "subject id for single-image mode");
    add_common(extract);

    CLI::App* phantom = app.add_subcommand("phantom", "generate seeded phantom corpus");
    phantom->add_option("--count", o.count, "number of phantoms");
    phantom->add_option("--width", o.width, "grid width (pixels)");
    phantom->add_option("--height", o.height, "grid height (pixels)");
    phantom->add_option("--spacing", o.spacing, "pixel spacing (mm)");
    add_common(phantom);

    CLI::App* synth = app.add_subcommand("synthesize", "feature-conditioned tumor synthesis");
    synth->add_option("--background", o.background, "background image")->required();
    synth->add_option("--target", o.target, "target spec JSON")->required();
    synth->add_option("--budget", o.budget, "objective evaluation budget");
    synth->add_option("--center", o.center, "mask center \"x,y\" in mm (default: grid center)");
    add_common(synth);

    CLI::App* grid = app.add_subcommand("grid", "pixel-surface x sphericity synthesis sweep");
    grid->add_option("--background", o.background, "background image")->required();
    grid->add_option("--surfaces", o.surfaces, "comma list of pixel_surface targets (mm^2)")
        ->required();
    grid->add_option("--sphericities", o.sphericities, "comma list of sphericity targets")
        ->required();
    grid->add_option("--budget", o.budget, "objective evaluation budget per cell");
    grid->add_option("--center", o.center, "mask center \"x,y\" in mm (default: grid center)");
    add_common(grid);

    CLI::App* remove = app.add_subcommand("remove", "remove tumor via harmonic background fill");
    remove->add_option("--image", o.image, "image path")->required();
    remove->add_option("--labels", o.labels, "labels path")->required();
    remove->add_option("--noise", o.noise, "boundary-matched noise: on|off");
    add_common(remove);

    CLI::App* evaluate = app.add_subcommand("evaluate", "real-vs-synthetic similarity report");
    evaluate->add_option("--real", o.real_csv, "real cohort features CSV")->required();
    evaluate->add_option("--synth", o.synth_csv, "synthetic cohort features CSV")->required();
    evaluate->add_option("--pairing", o.pairing, "flattened | per-feature");
    evaluate->add_option("--permutation", o.permutation,
                         "permutation count for exact Spearman p (0 = t approximation)");
    add_common(evaluate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // usage errors exit 1, --help exits 0
    }

    try {
        if (extract->parsed()) return cmd_extract(o);
        if (phantom->parsed()) return cmd_phantom(o);
        if (synth->parsed()) return cmd_synthesize(o);
        if (grid->parsed()) return cmd_grid(o);
        if (remove->parsed()) return cmd_remove(o);
        if (evaluate->parsed()) return cmd_evaluate(o);
    } catch (const std::exception& e) {
        std::cerr << "radsynth: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
