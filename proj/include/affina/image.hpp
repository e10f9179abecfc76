#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affina/common.hpp"
#include "affina/mat.hpp"

namespace affina {

// Single-channel float raster, row major. Loaded images live in [0,1];
// derived rasters (derivatives, responses) are signed and unbounded.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, float fill = 0.0f)
        : w_(width), h_(height), data_(static_cast<size_t>(width) * height, fill) {
        if (width <= 0 || height <= 0)
            throw SizeError("image dimensions must be positive");
    }

    int width() const { return w_; }
    int height() const { return h_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* row(int y) { return data_.data() + static_cast<size_t>(y) * w_; }
    const float* row(int y) const { return data_.data() + static_cast<size_t>(y) * w_; }

    float& at(int x, int y) { return data_[static_cast<size_t>(y) * w_ + x]; }
    float at(int x, int y) const { return data_[static_cast<size_t>(y) * w_ + x]; }

    // Edge-replicating access.
    float at_clamped(int x, int y) const {
        x = x < 0 ? 0 : (x >= w_ ? w_ - 1 : x);
        y = y < 0 ? 0 : (y >= h_ ? h_ - 1 : y);
        return at(x, y);
    }

    float bilinear(double x, double y) const;

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

private:
    int w_ = 0, h_ = 0;
    std::vector<float> data_;
};

// Loads a PGM (P5), PPM (P6) or PNG (8-bit gray/RGB) file. Color inputs are
// converted to luminance 0.299 R + 0.587 G + 0.114 B; output values in [0,1].
GrayImage load_image(const std::string& path);

// Writes a binary PGM, mapping [lo,hi] affinely to 0..255.
void save_pgm(const GrayImage& img, const std::string& path);
void save_pgm_normalized(const GrayImage& img, const std::string& path);

// Half-size image: floor(dims/2), each output pixel the mean of a 2x2 block.
GrayImage downsample2(const GrayImage& img);

// Resamples img through the affine map p_src = M * (p_dst + t), bilinear,
// out-of-range samples replicate the border. Used by the warped-channel path.
GrayImage warp_affine(const GrayImage& img, const Mat2& M, const Vec2& t,
                      int out_w, int out_h);

}  // namespace affina
