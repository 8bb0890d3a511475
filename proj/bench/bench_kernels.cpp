// Compares the OpenMP kernels against the serial reference implementations:
// wall time and worst-case value disagreement.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "radsynth/features.hpp"
#include "radsynth/grid.hpp"
#include "radsynth/mask.hpp"
#include "radsynth/synth.hpp"
#include "radsynth/texture.hpp"
#include "radsynth_ref.hpp"

using namespace radsynth;
using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; both columns run serial code\n");
#endif
    std::printf("%-28s %12s %12s %9s %13s\n", "kernel", "serial ms", "parallel ms", "speedup",
                "max |diff|");

    // Harmonic fill on a 256x256 grid with a radius-60 disk mask.
    {
        GridGeometry geom = make_geometry(256, 256, 1.0, 1.0);
        auto [image, labels] = make_phantom(7, geom);
        BinaryMask disk = circular_mask(geom, 128, 128, 120);
        SorOptions opts;

        auto t0 = Clock::now();
        ImageGrid serial = ref::sor_fill_serial(image, disk, opts);
        double t_serial = ms_since(t0);

        t0 = Clock::now();
        ImageGrid parallel = background_fill(image, disk, 1, false, opts);
        double t_parallel = ms_since(t0);

        double diff = 0;
        for (std::size_t i = 0; i < serial.values.size(); ++i)
            diff = std::max(diff, std::fabs(serial.values[i] - parallel.values[i]));
        std::printf("%-28s %12.1f %12.1f %8.2fx %13.3e\n", "harmonic fill 256^2", t_serial,
                    t_parallel, t_serial / t_parallel, diff);
    }

    // GLCM features over a large ROI.
    {
        GridGeometry geom = make_geometry(384, 384, 1.0, 1.0);
        auto [image, labels] = make_phantom(11, geom);
        BinaryMask roi = circular_mask(geom, 192, 192, 300);
        DiscretizationConfig disc;

        auto t0 = Clock::now();
        GlcmFeatures serial = ref::glcm_features_averaged_reference(image, roi, disc);
        double t_serial = ms_since(t0);

        t0 = Clock::now();
        GlcmFeatures parallel = glcm_features(build_glcm(image, roi, disc));
        double t_parallel = ms_since(t0);

        double diff = std::fabs(serial.contrast - parallel.contrast);
        diff = std::max(diff, std::fabs(serial.joint_entropy - parallel.joint_entropy));
        diff = std::max(diff, std::fabs(serial.mcc - parallel.mcc));
        std::printf("%-28s %12.1f %12.1f %8.2fx %13.3e\n", "glcm features 384^2", t_serial,
                    t_parallel, t_serial / t_parallel, diff);
    }

    // Blob rendering: the parallel kernel against itself pinned to 1 thread.
    {
        GridGeometry geom = make_geometry(512, 512, 1.0, 1.0);
        ImageGrid bg = ImageGrid::zeros(geom);
        BlobParams p;
        p.cx = 256;
        p.cy = 256;
        p.r0 = 120;
        p.a[2] = 0.15;
        p.smooth_px = 2;

#ifdef _OPENMP
        int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        auto t0 = Clock::now();
        auto serial = render_blob(p, geom, bg, 3);
        double t_serial = ms_since(t0);
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        t0 = Clock::now();
        auto parallel = render_blob(p, geom, bg, 3);
        double t_parallel = ms_since(t0);

        double diff = 0;
        for (std::size_t i = 0; i < serial.first.values.size(); ++i)
            diff = std::max(diff,
                            std::fabs(serial.first.values[i] - parallel.first.values[i]));
        std::printf("%-28s %12.1f %12.1f %8.2fx %13.3e\n", "blob render 512^2", t_serial,
                    t_parallel, t_serial / t_parallel, diff);
    }

    // Cohort extraction across 8 phantom subjects.
    {
        GridGeometry geom = make_geometry(128, 128, 1.0, 1.0);
        std::vector<std::pair<ImageGrid, LabelGrid>> subjects;
        for (int i = 0; i < 8; ++i) subjects.push_back(make_phantom(100 + std::uint64_t(i), geom));
        DiscretizationConfig disc;
        auto rois = default_rois();

#ifdef _OPENMP
        int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        auto t0 = Clock::now();
        for (const auto& [img, lab] : subjects) extract_features(img, lab, rois, disc);
        double t_serial = ms_since(t0);
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        t0 = Clock::now();
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < int(subjects.size()); ++i)
            extract_features(subjects[std::size_t(i)].first, subjects[std::size_t(i)].second, rois,
                             disc);
        double t_parallel = ms_since(t0);
        std::printf("%-28s %12.1f %12.1f %8.2fx %13s\n", "extract 8 subjects 128^2", t_serial,
                    t_parallel, t_serial / t_parallel, "n/a");
    }
    return 0;
}
