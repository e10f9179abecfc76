#pragma once

#include <optional>
#include <string>
#include <vector>

#include "affina/scalespace.hpp"

namespace affina {

enum class ExtremumKind { None, Max, Min };

// Hessian of the LoG response surface plus the second-moment (Harris) matrix
// of its spatial gradient, both evaluated at one (x, y, sigma).
struct LocalMatrices {
    double hxx = 0.0, hxy = 0.0, hyy = 0.0;
    double n11 = 0.0, n12 = 0.0, n22 = 0.0;

    std::array<double, 2> psi() const { return sym_eigenvalues(hxx, hxy, hyy); }
    std::array<double, 2> nu() const { return sym_eigenvalues(n11, n12, n22); }
};

struct Feature {
    double x = 0.0, y = 0.0;  // original-image coordinates
    double sigma = 0.0;       // canonical scale, original sampling units
    ExtremumKind kind = ExtremumKind::None;
    int octave = 0;
    double response = 0.0;
    AffineParams channel{Mat2::identity(), 1.0};
    std::vector<double> orientations;  // radians, filled by the descriptor stage
};

struct DetectorConfig {
    std::vector<AffineParams> channels;  // empty -> identity only
    int n_octaves = 4;
    double edge_ratio = 10.0;       // r_max; threshold (r+1)^2/r
    double contrast_floor = 0.005;  // absolute |response| floor on [0,1] inputs
    double contrast_median_factor = 0.8 * 0.03;  // relative gate vs median
    bool warp_fast_path = true;     // resample non-identity channels
};

// identity plus tilts t in {sqrt 2, 2} crossed with longitudes
// {0, 45, 90, 135} degrees: A = R(phi) * diag(t, 1)
std::vector<AffineParams> default_channels();

// "default", "identity", or a semicolon list of "t,phi_deg" entries.
std::vector<AffineParams> parse_channels(const std::string& text);

// Eq. 4 with the pointwise gradient outer product (window_radius = 0) or a
// normalized Gaussian-weighted window of std 1.5 sigma otherwise.
LocalMatrices local_matrices(const OctavePoly& polys, double x, double y,
                             double sigma, int window_radius);

// 1/4 min(psi)^2 > max(nu), then the sign of max(psi) picks max vs min.
ExtremumKind extremum_test(const LocalMatrices& m);

// keep iff det > 0 and tr^2/det < (r_max+1)^2/r_max
bool edge_response_filter(double hxx, double hxy, double hyy, double r_max);

struct RefinedCandidate {
    double x = 0.0, y = 0.0, sigma = 0.0;  // octave coordinates
};

// Newton refinement on the LoG-derivative polynomials; re-centers when the
// offset exceeds half a pixel (at most 5 times) and re-solves the extremal
// scale at the final sub-pixel position.
std::optional<RefinedCandidate> refine_subpixel(const OctavePoly& polys, int x,
                                                int y, ExtremumKind kind,
                                                int margin);

// Candidate scan of one prepared pyramid; features in original coordinates,
// contrast-gated but not deduplicated.
std::vector<Feature> scan_pyramid(const Pyramid& pyr, const DetectorConfig& cfg);

// Full AIFD pipeline over all configured channels, deduplicated (2 px, 20%
// scale, keep the strongest) and sorted by (octave, y, x, sigma).
std::vector<Feature> detect(const GrayImage& img, const DetectorConfig& cfg);

// Index forms let callers keep satellite data (descriptors) aligned.
std::vector<size_t> dedupe_feature_indices(const std::vector<Feature>& feats);
std::vector<size_t> sort_feature_indices(const std::vector<Feature>& feats);
void dedupe_features(std::vector<Feature>& feats);
void sort_features(std::vector<Feature>& feats);

void save_features(const std::vector<Feature>& feats, const std::string& path);
std::vector<Feature> load_features(const std::string& path);

namespace ref {

struct SweepExtremum {
    double x, y, sigma;
    ExtremumKind kind;
    double response;
};

// Brute-force LoG scale-sweep detector: builds the scale-normalized LoG
// response at every scale of a dense geometric grid directly from the input
// and reports 26-neighborhood extrema. Oracle for the pyramid+polynomial
// detection path (isotropic only).
std::vector<SweepExtremum> scale_sweep_detect(const GrayImage& img, double sigma_lo,
                                              double sigma_hi, int steps,
                                              double min_abs_response);

}  // namespace ref

}  // namespace affina
