#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "affina/detector.hpp"

namespace affina {

// Canonical-frame gradient field of one channel at one scale, optionally
// restricted to a region of interest in octave coordinates.
struct GradientField {
    int octave = 0;
    double sigma_oct = 0.0;
    int x0 = 0, y0 = 0;  // ROI offset within the octave raster
    GrayImage gx, gy;

    // Bilinear sample at octave coordinates; false when outside the field.
    bool sample(double x, double y, double& out_gx, double& out_gy) const {
        const double lx = x - x0, ly = y - y0;
        if (lx < 0.0 || ly < 0.0 || lx > gx.width() - 1 || ly > gx.height() - 1)
            return false;
        out_gx = gx.bilinear(lx, ly);
        out_gy = gy.bilinear(lx, ly);
        return true;
    }
};

// Gradient samples on a side x side grid relocated through an affine map,
// with the vectors expressed in the steered (patch) frame.
struct GradientPatch {
    int side = 0;
    std::vector<float> gx, gy;
};

struct Descriptor128 {
    std::array<uint8_t, 128> values{};
    double x = 0.0, y = 0.0, sigma = 0.0, theta = 0.0;
    AffineParams channel{Mat2::identity(), 1.0};
    int feature_index = -1;
};

enum class DropReason { ScaleRange, Border, NoOrientation, ZeroNorm };

struct DescribeResult {
    std::vector<Descriptor128> descriptors;
    std::vector<std::pair<size_t, DropReason>> dropped;  // feature index, reason
};

// Full-frame gradient field at the given scale (frame units); picks the
// highest-resolution octave whose ladder covers sigma.
GradientField affine_gradient_field(const Pyramid& pyr, const AffineParams& a,
                                    double sigma);

// ROI variant used by describe(); rectangle is clipped to the octave raster.
GradientField gradient_field_roi(const Pyramid& pyr, int octave, double sigma_oct,
                                 int x0, int y0, int w, int h);

// Samples the field on a grid spanning [-half_extent, half_extent]^2 (units
// of sigma) mapped through a_prime around the feature position; vectors are
// steered by the rotation part of a_prime. nullopt when any sample leaves
// the field (feature too close to the border).
std::optional<GradientPatch> relocate_patch(const GradientField& field, double fx,
                                            double fy, double sigma_oct,
                                            const Mat2& a_prime, double half_extent,
                                            int side);

// 36-bin magnitude-weighted histogram over a 3 sigma square (relocated by
// the channel transform), 80% peak rule, parabolic offset; dominant
// orientation first.
std::vector<double> assign_orientations(const GradientField& field, double fx,
                                        double fy, double sigma_oct,
                                        const Mat2& channel_frame);

// Normalize to unit L2, clamp components at 0.2, renormalize.
// nullopt for zero-norm accumulators.
std::optional<std::array<float, 128>> normalize_clamp(const std::array<double, 128>& acc);

// Byte quantization round(512 v) saturated at 255.
std::array<uint8_t, 128> quantize_descriptor(const std::array<float, 128>& raw);

// Normalized, clamped (0.2), renormalized 128-vector before quantization.
std::optional<std::array<float, 128>> build_descriptor_raw(const GradientPatch& patch);

std::optional<std::array<uint8_t, 128>> build_descriptor(const GradientPatch& patch);

// Fills feature orientations and produces one descriptor per orientation.
DescribeResult describe(std::vector<Feature>& feats, const Pyramid& pyr);

// Text format: dimension line, count line, then "x y a b c v1 ... v128"
// where a x^2 + 2 b x y + c y^2 = 1 is the scale ellipse from sigma and the
// channel transform.
void save_descriptors(const std::vector<Descriptor128>& descs, const std::string& path);
std::vector<Descriptor128> load_descriptors(const std::string& path);

namespace ref {

// Direct dense-convolution gradient field oracle (isotropic).
void gradient_direct(const GrayImage& img, double sigma, GrayImage& gx, GrayImage& gy);

}  // namespace ref

}  // namespace affina
