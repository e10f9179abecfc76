#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "affina/convolve.hpp"
#include "affina/image.hpp"
#include "synth.hpp"

using namespace affina;

namespace {

std::string temp_path(const std::string& name) {
    return std::string("/tmp/affina_test_") + name;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("load 2x2 PGM rescales to [0,1]") {
    const std::string path = temp_path("a.pgm");
    write_file(path, std::string("P5\n2 2\n255\n") + '\x00' + '\xff' + '\xff' + '\x00');
    const GrayImage img = load_image(path);
    CHECK(img.width() == 2);
    CHECK(img.height() == 2);
    CHECK(img.at(0, 0) == doctest::Approx(0.0));
    CHECK(img.at(1, 0) == doctest::Approx(1.0));
    CHECK(img.at(0, 1) == doctest::Approx(1.0));
    CHECK(img.at(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("PGM comments and whitespace are tolerated") {
    const std::string path = temp_path("c.pgm");
    write_file(path, std::string("P5\n# comment\n 1 1 \n255\n") + '\x80');
    const GrayImage img = load_image(path);
    CHECK(img.at(0, 0) == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("PPM color converts to luminance") {
    const std::string path = temp_path("a.ppm");
    write_file(path, std::string("P6\n1 1\n255\n") + '\xff' + '\x00' + '\x00');
    const GrayImage img = load_image(path);
    CHECK(img.at(0, 0) == doctest::Approx(0.299).epsilon(1e-4));
}

TEST_CASE("1x1 PNG RGB red converts to 0.299") {
    // byte literal of a 1x1 red RGB PNG
    static const unsigned char png_bytes[] = {
        0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
        0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
        0x08, 0x02, 0x00, 0x00, 0x00, 0x90, 0x77, 0x53, 0xde, 0x00, 0x00, 0x00,
        0x0c, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0x00,
        0x00, 0x03, 0x01, 0x01, 0x00, 0xc9, 0xfe, 0x92, 0xef, 0x00, 0x00, 0x00,
        0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
    const std::string path = temp_path("red.png");
    write_file(path, std::string(reinterpret_cast<const char*>(png_bytes),
                                 sizeof(png_bytes)));
    const GrayImage img = load_image(path);
    CHECK(img.width() == 1);
    CHECK(img.height() == 1);
    CHECK(img.at(0, 0) == doctest::Approx(0.299).epsilon(1e-3));
}

TEST_CASE("unreadable and unsupported files raise the right errors") {
    CHECK_THROWS_AS(load_image("/nonexistent/nope.pgm"), IoError);
    const std::string path = temp_path("bad.txt");
    write_file(path, "not an image at all");
    CHECK_THROWS_AS(load_image(path), FormatError);
}

TEST_CASE("anisotropic kernel: identity equals textbook isotropic Gaussian") {
    const AffineParams a{Mat2::identity(), 1.6};
    const Kernel2D k = anisotropic_gaussian_kernel(a);
    const int r = k.radius;
    double sum = 0.0;
    std::vector<double> expect(k.weights.size());
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.6 * 1.6));
            expect[static_cast<size_t>(dy + r) * (2 * r + 1) + (dx + r)] = v;
            sum += v;
        }
    double worst = 0.0;
    for (size_t i = 0; i < expect.size(); ++i)
        worst = std::max(worst, std::abs(expect[i] / sum - k.weights[i]));
    CHECK(worst < 1e-9);
    CHECK(k.at(0, 0) == *std::max_element(k.weights.begin(), k.weights.end()));
    CHECK(k.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("anisotropic kernel second moments follow A sigma^2 A^T") {
    for (double sigma : {1.0, 1.6, 2.5}) {
        const AffineParams a{Mat2::diag(2.0, 1.0), sigma};
        const Kernel2D k = anisotropic_gaussian_kernel(a);
        CHECK(k.radius == static_cast<int>(std::ceil(kKernelTruncation * sigma * 2.0)));
        double mxx = 0.0, myy = 0.0, mxy = 0.0;
        for (int dy = -k.radius; dy <= k.radius; ++dy)
            for (int dx = -k.radius; dx <= k.radius; ++dx) {
                const double w = k.at(dx, dy);
                mxx += w * dx * dx;
                myy += w * dy * dy;
                mxy += w * dx * dy;
            }
        CHECK(mxx == doctest::Approx(4.0 * sigma * sigma).epsilon(0.02));
        CHECK(myy == doctest::Approx(sigma * sigma).epsilon(0.02));
        CHECK(std::abs(mxy) < 0.02 * sigma * sigma);
        CHECK(mxx / myy == doctest::Approx(4.0).epsilon(0.02));
    }
}

TEST_CASE("rotation by 90 degrees leaves the isotropic kernel unchanged") {
    const Kernel2D k1 = anisotropic_gaussian_kernel({Mat2::identity(), 1.0});
    const Kernel2D k2 = anisotropic_gaussian_kernel({Mat2::rotation(M_PI / 2.0), 1.0});
    REQUIRE(k1.radius == k2.radius);
    for (size_t i = 0; i < k1.weights.size(); ++i)
        CHECK(k1.weights[i] == doctest::Approx(k2.weights[i]).epsilon(1e-12));
}

TEST_CASE("singular transform is rejected") {
    CHECK_THROWS_AS(AffineParams(Mat2{1.0, 0.0, 0.0, 0.0}, 1.0), DomainError);
    CHECK_THROWS_AS(AffineParams(Mat2::identity(), -1.0), DomainError);
}

TEST_CASE("derivative kernels sum to zero, smoothing kernels to one") {
    for (auto fam : {KernelFamily::GaussDx, KernelFamily::Log, KernelFamily::LogDx,
                     KernelFamily::LogDxx, KernelFamily::LogDxy}) {
        const Kernel2D k = make_affine_kernel({Mat2::diag(1.5, 1.0), 1.4}, fam);
        CHECK(std::abs(k.sum()) < 1e-6);
    }
    const Kernel2D g = anisotropic_gaussian_kernel({Mat2::rotation(0.3), 2.0});
    CHECK(g.sum() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("convolution of a constant image is the same constant") {
    const GrayImage img(32, 24, 0.7f);
    const GrayImage out =
        convolve(img, anisotropic_gaussian_kernel({Mat2::identity(), 2.0}));
    for (float v : out.data()) CHECK(v == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("impulse response reproduces kernel weights") {
    GrayImage img(41, 41, 0.0f);
    img.at(20, 20) = 1.0f;
    const Kernel2D k = make_affine_kernel({Mat2::diag(1.5, 1.0), 1.2}, KernelFamily::Gauss);
    const GrayImage out = convolve(img, k);
    for (int dy = -k.radius; dy <= k.radius; ++dy)
        for (int dx = -k.radius; dx <= k.radius; ++dx)
            CHECK(out.at(20 + dx, 20 + dy) ==
                  doctest::Approx(k.at(dx, dy)).epsilon(1e-5));
}

TEST_CASE("parallel dense convolution equals serial reference on noise") {
    const GrayImage img = synth::noise_image(64, 64, 42);
    const Kernel2D k = anisotropic_gaussian_kernel({Mat2::identity(), 1.6});
    const GrayImage a = convolve(img, k);
    const GrayImage b = ref::convolve_dense_serial(img, k);
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst,
                         static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
    CHECK(worst < 1e-6);
}

TEST_CASE("separable path is bit-compatible with the dense path") {
    const GrayImage img = synth::noise_image(48, 40, 3);
    const auto g = gaussian_kernel_1d(2.2, 0);
    const GrayImage a = convolve_separable(img, g, g);
    const GrayImage b =
        convolve(img, anisotropic_gaussian_kernel({Mat2::identity(), 2.2}));
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst,
                         static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
    CHECK(worst < 1e-6);
}

TEST_CASE("kernel larger than image raises a size error") {
    const GrayImage img(8, 8, 0.5f);
    const Kernel2D k = anisotropic_gaussian_kernel({Mat2::identity(), 4.0});
    CHECK(k.radius >= 8);
    CHECK_THROWS_AS(convolve(img, k), SizeError);
}

TEST_CASE("convolution is linear") {
    const GrayImage i1 = synth::noise_image(24, 24, 5);
    const GrayImage i2 = synth::noise_image(24, 24, 6);
    const Kernel2D k = anisotropic_gaussian_kernel({Mat2::identity(), 1.3});
    const double alpha = 0.7, beta = -0.4;
    GrayImage mix(24, 24);
    for (size_t i = 0; i < mix.size(); ++i)
        mix.data()[i] = static_cast<float>(alpha * i1.data()[i] + beta * i2.data()[i]);
    const GrayImage lhs = convolve(mix, k);
    const GrayImage c1 = convolve(i1, k);
    const GrayImage c2 = convolve(i2, k);
    for (size_t i = 0; i < lhs.size(); ++i)
        CHECK(lhs.data()[i] ==
              doctest::Approx(alpha * c1.data()[i] + beta * c2.data()[i]).epsilon(1e-5));
}

TEST_CASE("downsample2 block averages") {
    GrayImage img(2, 2);
    img.at(0, 0) = 0.0f;
    img.at(1, 0) = 1.0f;
    img.at(0, 1) = 1.0f;
    img.at(1, 1) = 0.0f;
    const GrayImage half = downsample2(img);
    CHECK(half.width() == 1);
    CHECK(half.height() == 1);
    CHECK(half.at(0, 0) == doctest::Approx(0.5));

    const GrayImage c(4, 4, 0.7f);
    const GrayImage hc = downsample2(c);
    CHECK(hc.width() == 2);
    for (float v : hc.data()) CHECK(v == doctest::Approx(0.7));

    CHECK_THROWS_AS(downsample2(GrayImage(1, 3, 0.0f)), SizeError);
}

TEST_CASE("downsampled ramp reconstructs within 0.01 RMS") {
    const GrayImage ramp = synth::ramp_image(64, 64, 1.0 / 64.0, 0.5 / 64.0);
    const GrayImage half = downsample2(ramp);
    double se = 0.0;
    int n = 0;
    for (int y = 2; y < 62; ++y)
        for (int x = 2; x < 62; ++x) {
            const double rec = half.bilinear((x - 0.5) / 2.0, (y - 0.5) / 2.0);
            const double err = rec - ramp.at(x, y);
            se += err * err;
            ++n;
        }
    CHECK(std::sqrt(se / n) < 0.01);
}

TEST_CASE("PGM save quantizes to half a level") {
    const GrayImage img = synth::noise_image(16, 12, 9);
    const std::string path = temp_path("round2.pgm");
    save_pgm(img, path);
    const GrayImage back = load_image(path);
    double worst = 0.0;
    for (size_t i = 0; i < img.size(); ++i)
        worst = std::max(worst,
                         static_cast<double>(std::abs(back.data()[i] - img.data()[i])));
    CHECK(worst <= 0.5 / 255.0 + 1e-6);
}
