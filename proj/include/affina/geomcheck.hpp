#pragma once

#include <cstdint>
#include <vector>

#include "affina/mat.hpp"

namespace affina {

// Pairwise log distance ratios ln(|Xi-Xj| / |Yi-Yj|), symmetric storage with
// a validity mask for degenerate (near-coincident) pairs.
struct LdrMatrix {
    int n = 0;
    std::vector<float> z;        // n*n, antisymmetric off the diagonal
    std::vector<uint8_t> valid;  // n*n

    float at(int i, int j) const { return z[static_cast<size_t>(i) * n + j]; }
    bool ok(int i, int j) const { return valid[static_cast<size_t>(i) * n + j] != 0; }
};

// Discrete outlier model plus the observed histogram and its decomposition
// h = beta f + d.
struct LdrModel {
    int K = 25;
    double z_lo = -2.5, z_hi = 2.5;
    std::vector<double> f;
    std::vector<double> h;
    double beta = 0.0;
    std::vector<double> d;
};

struct InlierResult {
    double m_hat = 0.0;
    double eigenvalue = 0.0;
    std::vector<double> eigenvector;
    std::vector<int> inlier_indices;  // ascending
    bool low_confidence = false;      // m_hat < 6
};

enum class GofResult { RejectPair, Pass };

struct GofStats {
    double chi2 = 0.0;
    double critical = 0.0;
    int dof = 0;
    GofResult result = GofResult::RejectPair;
};

LdrMatrix compute_ldr(const std::vector<Vec2>& X, const std::vector<Vec2>& Y);

// Equal-width histogram over [z_lo, z_hi]; out-of-range values are clipped
// into the end bins, invalid pairs skipped.
std::vector<double> ldr_histogram(const LdrMatrix& ldrs, int K, double z_lo,
                                  double z_hi);
std::vector<double> histogram_values(const std::vector<double>& values, int K,
                                     double z_lo, double z_hi);

// Bin probabilities of the outlier LDR under S ~ F(2,2), z = ln sqrt(S):
// density sech(z)^2 / 2, so f(k) = (tanh(hi_k) - tanh(lo_k)) / 2.
std::vector<double> outlier_pdf(int K, double z_lo, double z_hi);

// beta = sum h f / sum f^2 (projection of h onto the outlier model).
double estimate_beta(const std::vector<double>& h, const std::vector<double>& f);

LdrModel make_ldr_model(const LdrMatrix& ldrs, int K, double z_lo, double z_hi);

// Pearson chi-square against E(k) = sum(h) f(k) / sum(f). Adjacent bins with
// expected count below 5 are merged inward from both ends (Cochran's rule;
// the spec's 1e-9 floor is subsumed) and the dof follows the merged bin
// count. Statistic <= quantile means the histogram is explained by pure
// outliers: the image pair is rejected.
GofStats goodness_of_fit_test(const std::vector<double>& h,
                              const std::vector<double>& f, double alpha);

// Inlier matrix D_ij = d(q(z_ij)), dominant eigenpair by power iteration,
// m_hat = 1 + mu / max_k d(k); the round(m_hat) largest eigenvector entries
// are the inliers.
InlierResult extract_inliers(const LdrMatrix& ldrs, const LdrModel& model);

struct VerifyConfig {
    int K = 25;
    double z_range = 2.5;
    double alpha = 0.01;
};

struct VerifyResult {
    int n = 0;
    bool pass = false;  // geometric structure detected
    double chi2 = 0.0;
    double beta = 0.0;
    double m_hat = 0.0;
    bool low_confidence = false;
    std::vector<int> inlier_indices;
};

// Full DISTRAT driver: normalizes coordinates to zero mean / unit RMS per
// image, models the all-pairs histogram, gates with the chi-square test on
// a decorrelated cyclic pair subset, then extracts inliers.
VerifyResult distrat_verify(const std::vector<Vec2>& X, const std::vector<Vec2>& Y,
                            const VerifyConfig& cfg);

}  // namespace affina
