#pragma once

#include <array>
#include <cmath>

#include "affina/common.hpp"

namespace affina {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

// Row-major 2x2 matrix.
struct Mat2 {
    double a = 1.0, b = 0.0;  // [a b]
    double c = 0.0, d = 1.0;  // [c d]

    static Mat2 identity() { return {}; }
    static Mat2 rotation(double theta) {
        const double ct = std::cos(theta), st = std::sin(theta);
        return {ct, -st, st, ct};
    }
    static Mat2 diag(double dx, double dy) { return {dx, 0.0, 0.0, dy}; }

    double det() const { return a * d - b * c; }

    Mat2 inverse() const {
        const double dt = det();
        if (std::abs(dt) < 1e-12)
            throw DomainError("degenerate 2x2 matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    Mat2 transpose() const { return {a, c, b, d}; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    // Largest singular value.
    double spectral_norm() const {
        const double p = a * a + b * b, q = c * c + d * d;
        const double r = a * c + b * d;
        const double tr = p + q;
        const double disc = std::sqrt(std::max((p - q) * (p - q) + 4.0 * r * r, 0.0));
        return std::sqrt(0.5 * (tr + disc));
    }

    // Rotation factor R of the polar decomposition M = R * S, S symmetric psd.
    Mat2 polar_rotation() const {
        // For 2x2: R = (M + det-sign * adj(M)^T scaled) normalized; use the
        // closed form R = (M + s*J M J^T)/|..| with s = sign(det).
        const double s = det() >= 0.0 ? 1.0 : -1.0;
        const double e = a + s * d, f = c - s * b;
        const double n = std::sqrt(e * e + f * f);
        if (n < 1e-12) return Mat2::identity();
        return {e / n, -s * f / n, f / n, s * e / n};
    }
};

// Symmetric 2x2 eigenvalues, ascending.
inline std::array<double, 2> sym_eigenvalues(double m00, double m01, double m11) {
    const double tr = m00 + m11;
    const double dt = m00 * m11 - m01 * m01;
    const double disc = std::sqrt(std::max(tr * tr * 0.25 - dt, 0.0));
    return {tr * 0.5 - disc, tr * 0.5 + disc};
}

// Row-major 3x3, used for homographies.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }

    double& operator()(int r, int c) { return m[r * 3 + c]; }
    double operator()(int r, int c) const { return m[r * 3 + c]; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                out(r, c) = s;
            }
        return out;
    }

    Mat3 inverse() const {
        const auto& a = m;
        const double c00 = a[4] * a[8] - a[5] * a[7];
        const double c01 = a[5] * a[6] - a[3] * a[8];
        const double c02 = a[3] * a[7] - a[4] * a[6];
        const double dt = a[0] * c00 + a[1] * c01 + a[2] * c02;
        if (std::abs(dt) < 1e-15)
            throw DomainError("singular 3x3 matrix");
        Mat3 out;
        out.m = {c00 / dt, (a[2] * a[7] - a[1] * a[8]) / dt, (a[1] * a[5] - a[2] * a[4]) / dt,
                 c01 / dt, (a[0] * a[8] - a[2] * a[6]) / dt, (a[2] * a[3] - a[0] * a[5]) / dt,
                 c02 / dt, (a[1] * a[6] - a[0] * a[7]) / dt, (a[0] * a[4] - a[1] * a[3]) / dt};
        return out;
    }

    // Projective map of a point.
    Vec2 apply(const Vec2& p) const {
        const double w = m[6] * p.x + m[7] * p.y + m[8];
        return {(m[0] * p.x + m[1] * p.y + m[2]) / w,
                (m[3] * p.x + m[4] * p.y + m[5]) / w};
    }

    // Jacobian (affine linearization) of the projective map at p.
    Mat2 jacobian(const Vec2& p) const {
        const double w = m[6] * p.x + m[7] * p.y + m[8];
        const double u = m[0] * p.x + m[1] * p.y + m[2];
        const double v = m[3] * p.x + m[4] * p.y + m[5];
        return {(m[0] * w - u * m[6]) / (w * w), (m[1] * w - u * m[7]) / (w * w),
                (m[3] * w - v * m[6]) / (w * w), (m[4] * w - v * m[7]) / (w * w)};
    }
};

}  // namespace affina
