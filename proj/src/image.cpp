#include "affina/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace affina {

float GrayImage::bilinear(double x, double y) const {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    const float v00 = at_clamped(x0, y0), v10 = at_clamped(x0 + 1, y0);
    const float v01 = at_clamped(x0, y0 + 1), v11 = at_clamped(x0 + 1, y0 + 1);
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    return static_cast<float>(top + fy * (bot - top));
}

namespace {

constexpr double kLumR = 0.299, kLumG = 0.587, kLumB = 0.114;

int pnm_token(std::istream& in) {
    // skips whitespace and '#' comments, reads one non-negative integer
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c))
        throw FormatError("malformed PNM header");
    int v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = in.get();
    }
    return v;
}

GrayImage load_pnm(const std::string& path, bool color) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[2];
    in.read(magic, 2);
    const int w = pnm_token(in);
    const int h = pnm_token(in);
    const int maxval = pnm_token(in);
    if (w <= 0 || h <= 0) throw FormatError("bad PNM dimensions in " + path);
    if (maxval <= 0 || maxval > 255)
        throw FormatError("unsupported PNM maxval " + std::to_string(maxval));
    const int ch = color ? 3 : 1;
    std::vector<uint8_t> buf(static_cast<size_t>(w) * h * ch);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw FormatError("truncated PNM data in " + path);

    GrayImage img(w, h);
    const float inv = 1.0f / static_cast<float>(maxval);
    for (int y = 0; y < h; ++y) {
        float* dst = img.row(y);
        const uint8_t* src = buf.data() + static_cast<size_t>(y) * w * ch;
        if (color) {
            for (int x = 0; x < w; ++x) {
                const double lum = kLumR * src[3 * x] + kLumG * src[3 * x + 1] +
                                   kLumB * src[3 * x + 2];
                dst[x] = static_cast<float>(lum) * inv;
            }
        } else {
            for (int x = 0; x < w; ++x) dst[x] = src[x] * inv;
        }
    }
    return img;
}

GrayImage load_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("corrupt PNG " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw FormatError("unsupported PNG channel layout in " + path);
    }

    std::vector<uint8_t> rowbuf(static_cast<size_t>(w) * channels);
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, rowbuf.data(), nullptr);
        float* dst = img.row(y);
        if (channels == 3) {
            for (int x = 0; x < w; ++x) {
                const double lum = kLumR * rowbuf[3 * x] + kLumG * rowbuf[3 * x + 1] +
                                   kLumB * rowbuf[3 * x + 2];
                dst[x] = static_cast<float>(lum / 255.0);
            }
        } else {
            for (int x = 0; x < w; ++x) dst[x] = rowbuf[x] / 255.0f;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

}  // namespace

GrayImage load_image(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    uint8_t sig[8] = {0};
    probe.read(reinterpret_cast<char*>(sig), 8);
    probe.close();

    static const uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (std::memcmp(sig, png_sig, 8) == 0) return load_png(path);
    if (sig[0] == 'P' && sig[1] == '5') return load_pnm(path, false);
    if (sig[0] == 'P' && sig[1] == '6') return load_pnm(path, true);
    throw FormatError("unsupported image format: " + path);
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    std::vector<uint8_t> row(img.width());
    for (int y = 0; y < img.height(); ++y) {
        const float* src = img.row(y);
        for (int x = 0; x < img.width(); ++x) {
            const float v = std::clamp(src[x], 0.0f, 1.0f);
            row[x] = static_cast<uint8_t>(std::lround(v * 255.0f));
        }
        out.write(reinterpret_cast<const char*>(row.data()), img.width());
    }
}

void save_pgm_normalized(const GrayImage& img, const std::string& path) {
    float lo = img.data()[0], hi = img.data()[0];
    for (float v : img.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const float range = hi - lo > 1e-12f ? hi - lo : 1.0f;
    GrayImage mapped(img.width(), img.height());
    for (size_t i = 0; i < img.size(); ++i)
        mapped.data()[i] = (img.data()[i] - lo) / range;
    save_pgm(mapped, path);
}

GrayImage downsample2(const GrayImage& img) {
    if (img.width() < 2 || img.height() < 2)
        throw SizeError("downsample2 requires dimensions >= 2");
    const int ow = img.width() / 2, oh = img.height() / 2;
    GrayImage out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        const float* r0 = img.row(2 * y);
        const float* r1 = img.row(2 * y + 1);
        float* dst = out.row(y);
        for (int x = 0; x < ow; ++x)
            dst[x] = 0.25f * (r0[2 * x] + r0[2 * x + 1] + r1[2 * x] + r1[2 * x + 1]);
    }
    return out;
}

GrayImage warp_affine(const GrayImage& img, const Mat2& M, const Vec2& t,
                      int out_w, int out_h) {
    GrayImage out(out_w, out_h);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < out_h; ++y) {
        float* dst = out.row(y);
        for (int x = 0; x < out_w; ++x) {
            const Vec2 p = M * Vec2{x + t.x, y + t.y};
            dst[x] = img.bilinear(p.x, p.y);
        }
    }
    return out;
}

}  // namespace affina
