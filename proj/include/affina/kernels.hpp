#pragma once

#include <vector>

#include "affina/common.hpp"
#include "affina/mat.hpp"

namespace affina {

// Affine channel parameters: a 2x2 transform plus a scale. The transform
// deforms the Gaussian covariance to Sigma_s = A sigma^2 A^T; identity A
// recovers the usual isotropic scale space.
struct AffineParams {
    Mat2 A;
    double sigma = 1.0;

    AffineParams() = default;
    AffineParams(const Mat2& a, double s) : A(a), sigma(s) {
        if (std::abs(A.det()) <= 1e-9)
            throw DomainError("degenerate affine transform (|det A| <= 1e-9)");
        if (!(sigma > 0.0) || sigma > 64.0)
            throw DomainError("sigma out of (0, 64]");
    }

    bool is_identity() const {
        return std::abs(A.a - 1.0) < 1e-12 && std::abs(A.b) < 1e-12 &&
               std::abs(A.c) < 1e-12 && std::abs(A.d - 1.0) < 1e-12;
    }
};

// Kernels are truncated at this many standard deviations along the worst
// axis. 3.0 loses enough mass that the incremental pyramid drifts past the
// 1e-4/1e-3 budgets; 4.0 keeps the semi-group error below 5e-5.
constexpr double kKernelTruncation = 4.0;

// Dense square kernel, row major, (2*radius+1)^2 weights.
// Smoothing kernels are normalized to unit sum, derivative kernels to zero
// mean, so constant inputs map to themselves resp. to zero.
struct Kernel2D {
    int radius = 0;
    std::vector<double> weights;

    double at(int dx, int dy) const {
        return weights[static_cast<size_t>(dy + radius) * (2 * radius + 1) + (dx + radius)];
    }
    double sum() const;
};

enum class KernelFamily {
    Gauss,    // smoothing
    GaussDx,  // first Gaussian derivatives (descriptor gradients)
    GaussDy,
    Log,      // Laplacian of Gaussian
    LogDx,    // spatial derivatives of the LoG
    LogDy,
    LogDxx,
    LogDxy,
    LogDyy,
};

// Samples the anisotropic kernel k(eta) = K(A^-1 eta) / |det A| on the
// integer grid, where K is the isotropic family member at scale sigma.
// The 1/|det A| factor makes responses equal the canonical-frame response
// of the de-warped image, so channels stay comparable.
Kernel2D make_affine_kernel(const AffineParams& a, KernelFamily family,
                            double truncation = kKernelTruncation);

// Convenience wrapper for the smoothing case.
Kernel2D anisotropic_gaussian_kernel(const AffineParams& a,
                                     double truncation = kKernelTruncation);

// 1-D Hermite-Gaussian factors for the separable isotropic fast path.
// order 0 is the unit-sum Gaussian; even-order derivatives are zero-mean
// adjusted so composed 2-D kernels keep an exact zero DC response.
std::vector<double> gaussian_kernel_1d(double sigma, int order,
                                       double truncation = kKernelTruncation);

}  // namespace affina
