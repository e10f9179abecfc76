#include "affina/kernels.hpp"

#include <cmath>
#include <numeric>

namespace affina {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Canonical (isotropic) kernel families evaluated at (x, y), scale s.
double canonical_value(KernelFamily f, double x, double y, double s) {
    const double s2 = s * s;
    const double r2 = x * x + y * y;
    const double e = std::exp(-r2 / (2.0 * s2));
    switch (f) {
        case KernelFamily::Gauss:
            return e / (2.0 * kPi * s2);
        case KernelFamily::GaussDx:
            return -x / s2 * e / (2.0 * kPi * s2);
        case KernelFamily::GaussDy:
            return -y / s2 * e / (2.0 * kPi * s2);
        case KernelFamily::Log:
            return (r2 / (2.0 * s2) - 1.0) * e / (kPi * s2 * s2);
        case KernelFamily::LogDx:
            return x * (2.0 - r2 / (2.0 * s2)) * e / (kPi * s2 * s2 * s2);
        case KernelFamily::LogDy:
            return y * (2.0 - r2 / (2.0 * s2)) * e / (kPi * s2 * s2 * s2);
        case KernelFamily::LogDxx:
            return ((2.0 - r2 / (2.0 * s2)) * (1.0 - x * x / s2) - x * x / s2) * e /
                   (kPi * s2 * s2 * s2);
        case KernelFamily::LogDyy:
            return ((2.0 - r2 / (2.0 * s2)) * (1.0 - y * y / s2) - y * y / s2) * e /
                   (kPi * s2 * s2 * s2);
        case KernelFamily::LogDxy:
            return -x * y * (3.0 - r2 / (2.0 * s2)) * e / (kPi * s2 * s2 * s2 * s2);
    }
    return 0.0;
}

bool is_smoothing(KernelFamily f) { return f == KernelFamily::Gauss; }

}  // namespace

double Kernel2D::sum() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

Kernel2D make_affine_kernel(const AffineParams& a, KernelFamily family,
                            double truncation) {
    const double det = a.A.det();
    if (std::abs(det) <= 1e-9)
        throw DomainError("degenerate affine transform (|det A| <= 1e-9)");
    const Mat2 inv = a.A.inverse();
    const double inv_det = 1.0 / std::abs(det);

    Kernel2D k;
    k.radius = static_cast<int>(std::ceil(truncation * a.sigma * a.A.spectral_norm()));
    const int n = 2 * k.radius + 1;
    k.weights.resize(static_cast<size_t>(n) * n);

    for (int dy = -k.radius; dy <= k.radius; ++dy) {
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
            const Vec2 u = inv * Vec2{static_cast<double>(dx), static_cast<double>(dy)};
            k.weights[static_cast<size_t>(dy + k.radius) * n + (dx + k.radius)] =
                inv_det * canonical_value(family, u.x, u.y, a.sigma);
        }
    }

    const double s = k.sum();
    if (is_smoothing(family)) {
        for (double& w : k.weights) w /= s;
    } else {
        const double mean = s / static_cast<double>(k.weights.size());
        for (double& w : k.weights) w -= mean;
    }
    return k;
}

Kernel2D anisotropic_gaussian_kernel(const AffineParams& a, double truncation) {
    return make_affine_kernel(a, KernelFamily::Gauss, truncation);
}

std::vector<double> gaussian_kernel_1d(double sigma, int order, double truncation) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    const int r = static_cast<int>(std::ceil(truncation * sigma));
    std::vector<double> k(2 * r + 1);
    const double s2 = sigma * sigma;
    for (int i = -r; i <= r; ++i) {
        const double x = i;
        const double g = std::exp(-x * x / (2.0 * s2)) / (std::sqrt(2.0 * kPi) * sigma);
        double v = g;
        switch (order) {
            case 0: break;
            case 1: v = -x / s2 * g; break;
            case 2: v = (x * x / (s2 * s2) - 1.0 / s2) * g; break;
            case 3: v = (3.0 * x / (s2 * s2) - x * x * x / (s2 * s2 * s2)) * g; break;
            case 4:
                v = (x * x * x * x / (s2 * s2 * s2 * s2) -
                     6.0 * x * x / (s2 * s2 * s2) + 3.0 / (s2 * s2)) * g;
                break;
            default: throw DomainError("unsupported derivative order");
        }
        k[i + r] = v;
    }
    const double sum = std::accumulate(k.begin(), k.end(), 0.0);
    if (order == 0) {
        for (double& w : k) w /= sum;
    } else if (order % 2 == 0) {
        const double mean = sum / static_cast<double>(k.size());
        for (double& w : k) w -= mean;
    }
    // odd orders are antisymmetric: zero sum by construction
    return k;
}

}  // namespace affina
