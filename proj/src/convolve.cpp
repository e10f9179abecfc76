#include "affina/convolve.hpp"

#include <algorithm>

namespace affina {

namespace {

void check_kernel_fits(const GrayImage& img, int radius) {
    if (radius >= std::min(img.width(), img.height()))
        throw SizeError("kernel radius " + std::to_string(radius) +
                        " too large for " + std::to_string(img.width()) + "x" +
                        std::to_string(img.height()) + " image");
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Horizontal 1-D convolution of one row with flipped kernel, replicated ends.
void conv_row(const float* src, int w, const std::vector<double>& k, float* dst) {
    const int r = (static_cast<int>(k.size()) - 1) / 2;
    for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        if (x >= r && x + r < w) {
            const float* s = src + x + r;
            for (int i = 0; i < 2 * r + 1; ++i) acc += k[i] * s[-i];
        } else {
            for (int i = -r; i <= r; ++i) acc += k[i + r] * src[clampi(x - i, 0, w - 1)];
        }
        dst[x] = static_cast<float>(acc);
    }
}

}  // namespace

GrayImage convolve(const GrayImage& img, const Kernel2D& k) {
    check_kernel_fits(img, k.radius);
    const int w = img.width(), h = img.height(), r = k.radius;
    const int n = 2 * r + 1;
    GrayImage out(w, h);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
        float* dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            if (x >= r && x + r < w && y >= r && y + r < h) {
                for (int j = -r; j <= r; ++j) {
                    const float* src = img.row(y - j) + x;
                    const double* kr = &k.weights[static_cast<size_t>(j + r) * n + r];
                    for (int i = -r; i <= r; ++i) acc += kr[i] * src[-i];
                }
            } else {
                for (int j = -r; j <= r; ++j)
                    for (int i = -r; i <= r; ++i)
                        acc += k.weights[static_cast<size_t>(j + r) * n + (i + r)] *
                               img.at_clamped(x - i, y - j);
            }
            dst[x] = static_cast<float>(acc);
        }
    }
    return out;
}

GrayImage convolve_separable(const GrayImage& img, const std::vector<double>& kx,
                             const std::vector<double>& ky) {
    const int rx = (static_cast<int>(kx.size()) - 1) / 2;
    const int ry = (static_cast<int>(ky.size()) - 1) / 2;
    check_kernel_fits(img, std::max(rx, ry));
    const int w = img.width(), h = img.height();

    GrayImage tmp(w, h);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) conv_row(img.row(y), w, kx, tmp.row(y));

    GrayImage out(w, h);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
        // vertical replication handled by clamping the row index
        std::vector<const float*> rows(2 * ry + 1);
        for (int j = -ry; j <= ry; ++j)
            rows[j + ry] = tmp.row(clampi(y - j, 0, h - 1));
        float* dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 0; j < 2 * ry + 1; ++j) acc += ky[j] * rows[j][x];
            dst[x] = static_cast<float>(acc);
        }
    }
    return out;
}

void convolve_separable_add(const GrayImage& img, const std::vector<double>& kx,
                            const std::vector<double>& ky, GrayImage& out) {
    GrayImage term = convolve_separable(img, kx, ky);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < img.height(); ++y) {
        float* dst = out.row(y);
        const float* src = term.row(y);
        for (int x = 0; x < img.width(); ++x) dst[x] += src[x];
    }
}

namespace ref {

GrayImage convolve_dense_serial(const GrayImage& img, const Kernel2D& k) {
    check_kernel_fits(img, k.radius);
    const int w = img.width(), h = img.height(), r = k.radius;
    const int n = 2 * r + 1;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j)
                for (int i = -r; i <= r; ++i)
                    acc += k.weights[static_cast<size_t>(j + r) * n + (i + r)] *
                           img.at_clamped(x - i, y - j);
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

}  // namespace ref

}  // namespace affina
