#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "affina/convolve.hpp"
#include "affina/image.hpp"
#include "affina/kernels.hpp"

namespace affina {

// Per-octave scale ladder: four samples spanning a 2*sqrt(2) ratio.
constexpr std::array<double, 4> kScaleLadder = {1.6, 1.6 * 1.4142135623730951,
                                                3.2, 3.2 * 1.4142135623730951};
constexpr int kMinOctaveDim = 16;

// Maps the 4 scale samples of a stack to cubic coefficients; the inverse of
// the Vandermonde matrix with rows [s^3 s^2 s 1]. Constant per ladder.
struct PolyParamMatrix {
    std::array<std::array<double, 4>, 4> m{};
};

PolyParamMatrix compute_poly_param_matrix(const std::array<double, 4>& scales);

// Per-pixel cubic coefficients a*s^3 + b*s^2 + c*s + d describing one stack
// as a continuous function of scale. Coefficients are kept in double so the
// interpolation property holds to ~1e-13 relative.
struct PolyField {
    int w = 0, h = 0;
    std::vector<double> a, b, c, d;

    size_t idx(int x, int y) const { return static_cast<size_t>(y) * w + x; }

    double eval_at(int x, int y, double s) const {
        const size_t i = idx(x, y);
        return ((a[i] * s + b[i]) * s + c[i]) * s + d[i];
    }

    // Bilinear interpolation of the coefficients (equivalently of the values).
    double eval(double x, double y, double s) const;

    void coeffs(double x, double y, double out[4]) const;
};

PolyField fit_poly(const std::array<GrayImage, 4>& stack, const PolyParamMatrix& m);

// Bounds-checked evaluation; (x, y) may be fractional.
double eval_poly(const PolyField& pf, double x, double y, double sigma);

struct ExtremalScales {
    std::optional<double> sigma_max;  // root with negative cubic second derivative
    std::optional<double> sigma_min;
};

// Real roots of 3a s^2 + 2b s + c = 0 at an integer pixel, labeled by the
// sign of the second derivative and filtered to [range_lo, range_hi].
ExtremalScales solve_extremal_scales(const PolyField& pf, int x, int y,
                                     double range_lo = kScaleLadder[0],
                                     double range_hi = kScaleLadder[3]);

// Same from explicit coefficients (used at refined sub-pixel positions).
ExtremalScales solve_extremal_from_coeffs(const double coeffs[4], double range_lo,
                                          double range_hi);

struct Octave {
    int level = 0;
    std::array<double, 4> scales{};  // octave-relative
    GrayImage base;                  // pre-image at scales[0]/sqrt(2)
    std::array<GrayImage, 4> gauss;
    std::array<GrayImage, 4> log;
    std::array<GrayImage, 4> log_dx, log_dy, log_dxx, log_dxy, log_dyy;
    std::array<GrayImage, 4> gauss_dx, gauss_dy;  // descriptor gradients

    int width() const { return gauss[0].width(); }
    int height() const { return gauss[0].height(); }
};

struct OctavePoly {
    PolyField log, dx, dy, dxx, dxy, dyy, gx, gy;
};

// An affine scale-space pyramid plus the cubic fields of every stack.
// The frame transform maps original-image coordinates to the pyramid's
// sampling frame (identity unless built through the warped fast path).
struct Pyramid {
    AffineParams channel{Mat2::identity(), 1.0};       // reported channel
    AffineParams build_params{Mat2::identity(), 1.0};  // kernels actually used
    bool warped = false;
    Mat2 to_frame_M = Mat2::identity();
    Vec2 to_frame_t{0.0, 0.0};
    std::vector<Octave> octaves;
    std::vector<OctavePoly> polys;

    Vec2 to_frame(const Vec2& p) const { return to_frame_M * p + to_frame_t; }
    Vec2 from_frame(const Vec2& p) const {
        return to_frame_M.inverse() * (p - to_frame_t);
    }
};

// octave <-> pyramid-frame coordinate conversion (2x2 block-average centers)
inline double octave_to_frame_coord(double v, int level) {
    const double s = std::ldexp(1.0, level);
    return s * v + (s - 1.0) * 0.5;
}
inline double frame_to_octave_coord(double v, int level) {
    const double s = std::ldexp(1.0, level);
    return (v - (s - 1.0) * 0.5) / s;
}

int max_octaves(int width, int height);

// Builds the pyramid with anisotropic kernels on the input grid. Identity
// channels take a separable fast path; general channels use dense kernels.
Pyramid build_pyramid(const GrayImage& img, const AffineParams& a, int n_octaves);

// Fast path for non-identity channels: affinely resamples the image into the
// channel's canonical frame and runs the isotropic pipeline there. Responses
// match build_pyramid up to resampling error; coordinates are related by the
// pyramid's frame transform.
Pyramid build_pyramid_warped(const GrayImage& img, const AffineParams& a,
                             int n_octaves);

// Output dimensions of the canonical-frame resampling used by the fast path.
std::pair<int, int> warped_frame_dims(const GrayImage& img, const AffineParams& a);

// Fills the LoG / derivative / gradient stacks of one octave by convolving
// small-scale kernels with the matching pre-blurred raster (semi-group
// split); LoG-family stacks are scale-normalized by sigma^2.
void fill_derivative_stacks(Octave& oct, const AffineParams& build_params);

void dump_pyramid(const Pyramid& pyr, const std::string& dir);

namespace ref {

// Direct single-convolution stacks from the unblurred input; the semi-group
// oracle. Dense sampled kernels, serial convolution.
GrayImage gaussian_direct(const GrayImage& img, const AffineParams& a, double sigma);
GrayImage log_direct(const GrayImage& img, const AffineParams& a, double sigma);

}  // namespace ref

}  // namespace affina
