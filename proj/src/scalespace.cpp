#include "affina/scalespace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace affina {

namespace {

// Gauss-Jordan inverse with partial pivoting, 4x4.
std::array<std::array<double, 4>, 4> invert4(std::array<std::array<double, 4>, 4> a) {
    std::array<std::array<double, 4>, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12)
            throw DomainError("singular matrix (duplicate scales?)");
        std::swap(a[col], a[piv]);
        std::swap(inv[col], inv[piv]);
        const double d = a[col][col];
        for (int c = 0; c < 4; ++c) {
            a[col][c] /= d;
            inv[col][c] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (int c = 0; c < 4; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

GrayImage blur_iso(const GrayImage& img, double sigma) {
    const auto g = gaussian_kernel_1d(sigma, 0);
    return convolve_separable(img, g, g);
}

GrayImage blur_affine(const GrayImage& img, const AffineParams& a) {
    if (a.is_identity()) return blur_iso(img, a.sigma);
    return convolve(img, anisotropic_gaussian_kernel(a));
}

void scale_raster(GrayImage& img, double factor) {
    const float f = static_cast<float>(factor);
    for (float& v : img.data()) v *= f;
}

// One stack slice through the semi-group split: kernel(sl) * src where src
// already carries sigma_g = sigma / sqrt(2) of blur and sl = sigma / sqrt(2).
GrayImage stack_slice_iso(const GrayImage& src, KernelFamily fam, double sl) {
    const auto g0 = gaussian_kernel_1d(sl, 0);
    const auto g1 = gaussian_kernel_1d(sl, 1);
    const auto g2 = gaussian_kernel_1d(sl, 2);
    const auto g3 = gaussian_kernel_1d(sl, 3);
    const auto g4 = gaussian_kernel_1d(sl, 4);
    switch (fam) {
        case KernelFamily::GaussDx:
            return convolve_separable(src, g1, g0);
        case KernelFamily::GaussDy:
            return convolve_separable(src, g0, g1);
        case KernelFamily::Log: {
            GrayImage out = convolve_separable(src, g2, g0);
            convolve_separable_add(src, g0, g2, out);
            return out;
        }
        case KernelFamily::LogDx: {
            GrayImage out = convolve_separable(src, g3, g0);
            convolve_separable_add(src, g1, g2, out);
            return out;
        }
        case KernelFamily::LogDy: {
            GrayImage out = convolve_separable(src, g0, g3);
            convolve_separable_add(src, g2, g1, out);
            return out;
        }
        case KernelFamily::LogDxx: {
            GrayImage out = convolve_separable(src, g4, g0);
            convolve_separable_add(src, g2, g2, out);
            return out;
        }
        case KernelFamily::LogDyy: {
            GrayImage out = convolve_separable(src, g0, g4);
            convolve_separable_add(src, g2, g2, out);
            return out;
        }
        case KernelFamily::LogDxy: {
            GrayImage out = convolve_separable(src, g3, g1);
            convolve_separable_add(src, g1, g3, out);
            return out;
        }
        case KernelFamily::Gauss:
            return convolve_separable(src, g0, g0);
    }
    throw DomainError("unreachable kernel family");
}

GrayImage stack_slice(const GrayImage& src, const AffineParams& build_params,
                      KernelFamily fam, double sl) {
    if (build_params.is_identity()) return stack_slice_iso(src, fam, sl);
    return convolve(src, make_affine_kernel({build_params.A, sl}, fam));
}

}  // namespace

PolyParamMatrix compute_poly_param_matrix(const std::array<double, 4>& scales) {
    for (int i = 0; i < 4; ++i) {
        if (!(scales[i] > 0.0)) throw DomainError("scales must be positive");
        for (int j = i + 1; j < 4; ++j)
            if (scales[i] == scales[j]) throw DomainError("duplicate scales");
    }
    std::array<std::array<double, 4>, 4> v{};
    for (int i = 0; i < 4; ++i) {
        const double s = scales[i];
        v[i] = {s * s * s, s * s, s, 1.0};
    }
    PolyParamMatrix out;
    out.m = invert4(v);
    return out;
}

double PolyField::eval(double x, double y, double s) const {
    double co[4];
    coeffs(x, y, co);
    return ((co[0] * s + co[1]) * s + co[2]) * s + co[3];
}

void PolyField::coeffs(double x, double y, double out[4]) const {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    x0 = std::clamp(x0, 0, w - 2);
    y0 = std::clamp(y0, 0, h - 2);
    const double fx = std::clamp(x - x0, 0.0, 1.0);
    const double fy = std::clamp(y - y0, 0.0, 1.0);
    const double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
    const double w01 = (1 - fx) * fy, w11 = fx * fy;
    const size_t i00 = idx(x0, y0), i10 = i00 + 1;
    const size_t i01 = i00 + w, i11 = i01 + 1;
    const double* planes[4] = {a.data(), b.data(), c.data(), d.data()};
    for (int p = 0; p < 4; ++p) {
        const double* v = planes[p];
        out[p] = w00 * v[i00] + w10 * v[i10] + w01 * v[i01] + w11 * v[i11];
    }
}

PolyField fit_poly(const std::array<GrayImage, 4>& stack, const PolyParamMatrix& m) {
    const int w = stack[0].width(), h = stack[0].height();
    for (const auto& s : stack)
        if (s.width() != w || s.height() != h)
            throw SizeError("stack rasters differ in size");

    PolyField pf;
    pf.w = w;
    pf.h = h;
    const size_t n = static_cast<size_t>(w) * h;
    pf.a.resize(n);
    pf.b.resize(n);
    pf.c.resize(n);
    pf.d.resize(n);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
        const float* s0 = stack[0].row(y);
        const float* s1 = stack[1].row(y);
        const float* s2 = stack[2].row(y);
        const float* s3 = stack[3].row(y);
        const size_t base = static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const double v0 = s0[x], v1 = s1[x], v2 = s2[x], v3 = s3[x];
            pf.a[base + x] = m.m[0][0] * v0 + m.m[0][1] * v1 + m.m[0][2] * v2 + m.m[0][3] * v3;
            pf.b[base + x] = m.m[1][0] * v0 + m.m[1][1] * v1 + m.m[1][2] * v2 + m.m[1][3] * v3;
            pf.c[base + x] = m.m[2][0] * v0 + m.m[2][1] * v1 + m.m[2][2] * v2 + m.m[2][3] * v3;
            pf.d[base + x] = m.m[3][0] * v0 + m.m[3][1] * v1 + m.m[3][2] * v2 + m.m[3][3] * v3;
        }
    }
    return pf;
}

double eval_poly(const PolyField& pf, double x, double y, double sigma) {
    if (x < 0.0 || y < 0.0 || x > pf.w - 1 || y > pf.h - 1)
        throw DomainError("eval_poly position out of bounds");
    return pf.eval(x, y, sigma);
}

ExtremalScales solve_extremal_from_coeffs(const double co[4], double lo, double hi) {
    ExtremalScales out;
    const double qa = 3.0 * co[0], qb = 2.0 * co[1], qc = co[2];
    auto classify = [&](double s) {
        if (s < lo || s > hi) return;
        const double second = 6.0 * co[0] * s + 2.0 * co[1];
        if (second < 0.0)
            out.sigma_max = s;
        else if (second > 0.0)
            out.sigma_min = s;
    };
    if (std::abs(qa) < 1e-18) {
        if (std::abs(qb) < 1e-18) return out;  // degenerate: no interior extremum
        classify(-qc / qb);
        return out;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return out;
    const double sq = std::sqrt(disc);
    // numerically stable quadratic roots
    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
    classify(q / qa);
    if (std::abs(q) > 1e-300) classify(qc / q);
    return out;
}

ExtremalScales solve_extremal_scales(const PolyField& pf, int x, int y,
                                     double lo, double hi) {
    if (x < 0 || y < 0 || x >= pf.w || y >= pf.h)
        throw DomainError("solve_extremal_scales position out of bounds");
    const size_t i = pf.idx(x, y);
    const double co[4] = {pf.a[i], pf.b[i], pf.c[i], pf.d[i]};
    return solve_extremal_from_coeffs(co, lo, hi);
}

int max_octaves(int width, int height) {
    int n = 0;
    int d = std::min(width, height);
    while (d >= kMinOctaveDim) {
        ++n;
        d /= 2;
    }
    return n;
}

void fill_derivative_stacks(Octave& oct, const AffineParams& build_params) {
    for (int i = 0; i < 4; ++i) {
        const GrayImage& src = (i == 0) ? oct.base : oct.gauss[i - 1];
        const double sl = oct.scales[i] / std::sqrt(2.0);
        const double norm = oct.scales[i] * oct.scales[i];

        oct.log[i] = stack_slice(src, build_params, KernelFamily::Log, sl);
        scale_raster(oct.log[i], norm);
        oct.log_dx[i] = stack_slice(src, build_params, KernelFamily::LogDx, sl);
        scale_raster(oct.log_dx[i], norm);
        oct.log_dy[i] = stack_slice(src, build_params, KernelFamily::LogDy, sl);
        scale_raster(oct.log_dy[i], norm);
        oct.log_dxx[i] = stack_slice(src, build_params, KernelFamily::LogDxx, sl);
        scale_raster(oct.log_dxx[i], norm);
        oct.log_dxy[i] = stack_slice(src, build_params, KernelFamily::LogDxy, sl);
        scale_raster(oct.log_dxy[i], norm);
        oct.log_dyy[i] = stack_slice(src, build_params, KernelFamily::LogDyy, sl);
        scale_raster(oct.log_dyy[i], norm);
        oct.gauss_dx[i] = stack_slice(src, build_params, KernelFamily::GaussDx, sl);
        oct.gauss_dy[i] = stack_slice(src, build_params, KernelFamily::GaussDy, sl);
    }
}

namespace {

Pyramid build_pyramid_impl(const GrayImage& img, const AffineParams& channel,
                           const AffineParams& build_params, int n_octaves) {
    if (n_octaves < 1) throw DomainError("n_octaves must be >= 1");
    {
        const int top = std::min(img.width(), img.height()) >> (n_octaves - 1);
        if (top < kMinOctaveDim)
            throw SizeError("image too small for " + std::to_string(n_octaves) +
                            " octaves");
    }

    Pyramid pyr;
    pyr.channel = channel;
    pyr.build_params = build_params;
    pyr.octaves.resize(n_octaves);
    pyr.polys.resize(n_octaves);

    const double sigma_base = kScaleLadder[0] / std::sqrt(2.0);
    const PolyParamMatrix pm = compute_poly_param_matrix(kScaleLadder);

    for (int o = 0; o < n_octaves; ++o) {
        Octave& oct = pyr.octaves[o];
        oct.level = o;
        oct.scales = kScaleLadder;

        if (o == 0) {
            oct.base = blur_affine(img, {build_params.A, sigma_base});
            oct.gauss[0] = blur_affine(oct.base, {build_params.A, sigma_base});
        } else {
            // handoff: sigma 2.263 -> 1.131 and sigma 3.2 -> 1.6 after halving
            oct.base = downsample2(pyr.octaves[o - 1].gauss[1]);
            oct.gauss[0] = downsample2(pyr.octaves[o - 1].gauss[2]);
        }
        for (int i = 1; i < 4; ++i) {
            const double inc = std::sqrt(oct.scales[i] * oct.scales[i] -
                                         oct.scales[i - 1] * oct.scales[i - 1]);
            oct.gauss[i] = blur_affine(oct.gauss[i - 1], {build_params.A, inc});
        }

        fill_derivative_stacks(oct, build_params);

        OctavePoly& op = pyr.polys[o];
        op.log = fit_poly(oct.log, pm);
        op.dx = fit_poly(oct.log_dx, pm);
        op.dy = fit_poly(oct.log_dy, pm);
        op.dxx = fit_poly(oct.log_dxx, pm);
        op.dxy = fit_poly(oct.log_dxy, pm);
        op.dyy = fit_poly(oct.log_dyy, pm);
        op.gx = fit_poly(oct.gauss_dx, pm);
        op.gy = fit_poly(oct.gauss_dy, pm);
    }
    return pyr;
}

}  // namespace

Pyramid build_pyramid(const GrayImage& img, const AffineParams& a, int n_octaves) {
    return build_pyramid_impl(img, a, a, n_octaves);
}

namespace {

struct WarpBox {
    Vec2 lo, hi;
    int w, h;
};

WarpBox warp_box(const GrayImage& img, const AffineParams& a) {
    const Mat2 inv = a.A.inverse();
    WarpBox box{};
    const Vec2 corners[4] = {{0.0, 0.0},
                             {static_cast<double>(img.width() - 1), 0.0},
                             {0.0, static_cast<double>(img.height() - 1)},
                             {static_cast<double>(img.width() - 1),
                              static_cast<double>(img.height() - 1)}};
    for (int i = 0; i < 4; ++i) {
        const Vec2 u = inv * corners[i];
        if (i == 0) {
            box.lo = box.hi = u;
        } else {
            box.lo.x = std::min(box.lo.x, u.x);
            box.lo.y = std::min(box.lo.y, u.y);
            box.hi.x = std::max(box.hi.x, u.x);
            box.hi.y = std::max(box.hi.y, u.y);
        }
    }
    box.w = std::max(static_cast<int>(std::ceil(box.hi.x - box.lo.x)) + 1, 2);
    box.h = std::max(static_cast<int>(std::ceil(box.hi.y - box.lo.y)) + 1, 2);
    return box;
}

}  // namespace

std::pair<int, int> warped_frame_dims(const GrayImage& img, const AffineParams& a) {
    if (a.is_identity()) return {img.width(), img.height()};
    const WarpBox box = warp_box(img, a);
    return {box.w, box.h};
}

Pyramid build_pyramid_warped(const GrayImage& img, const AffineParams& a,
                             int n_octaves) {
    if (a.is_identity()) return build_pyramid(img, a, n_octaves);

    const WarpBox box = warp_box(img, a);
    const Vec2 lo = box.lo;
    const int out_w = box.w;
    const int out_h = box.h;

    // sample the source at A * (u + lo)
    GrayImage warped = warp_affine(img, a.A, lo, out_w, out_h);

    Pyramid pyr = build_pyramid_impl(warped, a, {Mat2::identity(), a.sigma}, n_octaves);
    pyr.warped = true;
    pyr.to_frame_M = a.A.inverse();
    pyr.to_frame_t = {-lo.x, -lo.y};
    return pyr;
}

void dump_pyramid(const Pyramid& pyr, const std::string& dir) {
    char path[512];
    for (const Octave& oct : pyr.octaves) {
        for (int i = 0; i < 4; ++i) {
            std::snprintf(path, sizeof(path), "%s/o%d_gauss%d.pgm", dir.c_str(),
                          oct.level, i);
            save_pgm_normalized(oct.gauss[i], path);
            std::snprintf(path, sizeof(path), "%s/o%d_log%d.pgm", dir.c_str(),
                          oct.level, i);
            save_pgm_normalized(oct.log[i], path);
        }
    }
}

namespace ref {

GrayImage gaussian_direct(const GrayImage& img, const AffineParams& a, double sigma) {
    return ref::convolve_dense_serial(img, anisotropic_gaussian_kernel({a.A, sigma}));
}

GrayImage log_direct(const GrayImage& img, const AffineParams& a, double sigma) {
    GrayImage out =
        ref::convolve_dense_serial(img, make_affine_kernel({a.A, sigma}, KernelFamily::Log));
    const float n = static_cast<float>(sigma * sigma);
    for (float& v : out.data()) v *= n;
    return out;
}

}  // namespace ref

}  // namespace affina
