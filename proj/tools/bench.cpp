// Timing comparison between the serial reference kernels and the
// OpenMP-parallel production paths.

#include <chrono>
#include <functional>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "affina/detector.hpp"
#include "affina/matcher.hpp"
#include "affina/threads.hpp"

using namespace affina;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

GrayImage noise_image(int w, int h, unsigned seed) {
    GrayImage img(w, h);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    for (float& v : img.data()) v = u(rng);
    return img;
}

}  // namespace

int main(int argc, char** argv) {
    int size = 512;
    if (argc > 1) size = std::atoi(argv[1]);
    const GrayImage img = noise_image(size, size, 7u);

    std::printf("image %dx%d, max threads %d\n\n", size, size, thread_count());
    std::printf("%-38s %10s\n", "kernel", "ms");

    const AffineParams iso{Mat2::identity(), 2.0};
    const Kernel2D k2 = anisotropic_gaussian_kernel(iso);
    float sink = 0.0f;

    {
        GrayImage out;
        const double t = time_ms([&] { out = ref::convolve_dense_serial(img, k2); });
        sink += out.at(0, 0);
        std::printf("%-38s %10.2f\n", "dense convolve (serial reference)", t);
    }
    {
        GrayImage out;
        const double t = time_ms([&] { out = convolve(img, k2); });
        sink += out.at(0, 0);
        std::printf("%-38s %10.2f\n", "dense convolve (OpenMP)", t);
    }
    {
        const auto g = gaussian_kernel_1d(2.0, 0);
        GrayImage out;
        const double t = time_ms([&] { out = convolve_separable(img, g, g); });
        sink += out.at(0, 0);
        std::printf("%-38s %10.2f\n", "separable convolve (OpenMP)", t);
    }
    {
        const AffineParams tilt{Mat2::diag(2.0, 1.0), 1.0};
        GrayImage out;
        const double t =
            time_ms([&] { out = convolve(img, anisotropic_gaussian_kernel(tilt)); });
        sink += out.at(0, 0);
        std::printf("%-38s %10.2f\n", "anisotropic dense convolve (OpenMP)", t);
    }

    for (int threads : {1, thread_count()}) {
        set_thread_count(threads);
        Pyramid pyr;
        const double t = time_ms(
            [&] {
                pyr = build_pyramid(img, {Mat2::identity(), 1.0},
                                    std::min(4, max_octaves(size, size)));
            },
            2);
        sink += pyr.octaves[0].gauss[0].at(0, 0);
        char label[64];
        std::snprintf(label, sizeof(label), "pyramid + polynomials (%d thread%s)",
                      threads, threads == 1 ? "" : "s");
        std::printf("%-38s %10.2f\n", label, t);
    }

    {
        std::mt19937 rng(11);
        std::uniform_int_distribution<int> byte(0, 255);
        std::vector<Descriptor128> a(1000), b(1000);
        for (auto* set : {&a, &b})
            for (auto& d : *set)
                for (auto& v : d.values) v = static_cast<uint8_t>(byte(rng));
        MatcherConfig mc;
        for (int threads : {1, thread_count()}) {
            set_thread_count(threads);
            std::vector<Match> m;
            const double t = time_ms([&] { m = match_descriptors(a, b, mc); });
            sink += static_cast<float>(m.size());
            char label[64];
            std::snprintf(label, sizeof(label), "matcher 1000x1000 (%d thread%s)",
                          threads, threads == 1 ? "" : "s");
            std::printf("%-38s %10.2f\n", label, t);
        }
    }

    std::printf("\n(checksum %.3f)\n", sink);
    return 0;
}
