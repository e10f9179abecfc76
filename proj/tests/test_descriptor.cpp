#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "affina/descriptor.hpp"
#include "affina/matcher.hpp"
#include "synth.hpp"

using namespace affina;

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_abs_interior(const GrayImage& a, const GrayImage& b, int margin) {
    double worst = 0.0;
    for (int y = margin; y < a.height() - margin; ++y)
        for (int x = margin; x < a.width() - margin; ++x)
            worst = std::max(worst,
                             static_cast<double>(std::abs(a.at(x, y) - b.at(x, y))));
    return worst;
}

// independent reference for normalize / clamp / renormalize / quantize
std::array<uint8_t, 128> reference_quantize(std::array<double, 128> acc) {
    double n = 0.0;
    for (double v : acc) n += v * v;
    n = std::sqrt(n);
    for (double& v : acc) v = std::min(v / n, 0.2);
    double n2 = 0.0;
    for (double v : acc) n2 += v * v;
    n2 = std::sqrt(n2);
    std::array<uint8_t, 128> out{};
    for (int i = 0; i < 128; ++i)
        out[i] = static_cast<uint8_t>(
            std::min(std::lround(512.0 * acc[i] / n2), 255L));
    return out;
}

}  // namespace

TEST_CASE("constant image has a zero gradient field") {
    const GrayImage img(64, 64, 0.5f);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    for (float v : f.gx.data()) CHECK(std::abs(v) < 1e-6);
    for (float v : f.gy.data()) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("ramp image: gx positive constant, gy zero") {
    const GrayImage img = synth::ramp_image(64, 64, 1.0 / 64.0, 0.0);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    for (int y = 12; y < 52; ++y)
        for (int x = 12; x < 52; ++x) {
            CHECK(f.gx.at(x, y) == doctest::Approx(1.0 / 64.0).epsilon(1e-3));
            CHECK(std::abs(f.gy.at(x, y)) < 1e-4);
        }
}

TEST_CASE("gradient field matches the dense convolution oracle on noise") {
    const GrayImage img = synth::noise_image(64, 64, 77);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const double sigma = kScaleLadder[1];
    const GradientField f = affine_gradient_field(pyr, pyr.channel, sigma);
    GrayImage gx, gy;
    ref::gradient_direct(img, sigma, gx, gy);
    CHECK(max_abs_interior(f.gx, gx, 16) < 1e-3);
    CHECK(max_abs_interior(f.gy, gy, 16) < 1e-3);
}

TEST_CASE("gradient field sigma selection rejects out-of-range scales") {
    const GrayImage img(64, 64, 0.5f);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    CHECK_THROWS_AS(affine_gradient_field(pyr, pyr.channel, 0.8), DomainError);
    CHECK_THROWS_AS(affine_gradient_field(pyr, pyr.channel, 40.0), DomainError);
}

TEST_CASE("identity relocation equals axis-aligned bilinear sampling") {
    const GrayImage img = synth::textured_image(64, 64, 31);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    const auto patch = relocate_patch(f, 32.0, 32.0, 2.0, Mat2::identity(), 6.0, 16);
    REQUIRE(patch.has_value());
    const double he = 6.0 * 2.0, step = 2.0 * he / 15.0;
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            double gx, gy;
            REQUIRE(f.sample(32.0 - he + j * step, 32.0 - he + i * step, gx, gy));
            CHECK(patch->gx[i * 16 + j] == doctest::Approx(gx).epsilon(1e-6));
            CHECK(patch->gy[i * 16 + j] == doctest::Approx(gy).epsilon(1e-6));
        }
}

TEST_CASE("90-degree relocation swaps gradient roles on a ramp") {
    const GrayImage img = synth::ramp_image(96, 96, 1.0 / 96.0, 0.0);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    const auto patch =
        relocate_patch(f, 48.0, 48.0, 2.0, Mat2::rotation(kPi / 2.0), 6.0, 16);
    REQUIRE(patch.has_value());
    // steering rotates the +x ramp gradient into the patch frame: the
    // gradient should appear along -y of the steered frame
    for (int i = 5; i < 11; ++i)
        for (int j = 5; j < 11; ++j) {
            CHECK(std::abs(patch->gx[i * 16 + j]) < 2e-4);
            CHECK(patch->gy[i * 16 + j] == doctest::Approx(-1.0 / 96.0).epsilon(0.05));
        }
}

TEST_CASE("tilted channel patch matches the frontal patch of the scene") {
    const GrayImage scene = synth::textured_image(96, 96, 55);
    const Mat2 W = Mat2::diag(2.0, 1.0);
    const synth::WarpedPair wp = synth::make_affine_pair(scene, W);

    const Pyramid pyr_scene = build_pyramid(scene, {Mat2::identity(), 1.0}, 1);
    const Pyramid pyr_warp = build_pyramid(wp.image, {W, 1.0}, 1);

    const GradientField f_scene = affine_gradient_field(pyr_scene, pyr_scene.channel, 2.0);
    const GradientField f_warp = affine_gradient_field(pyr_warp, pyr_warp.channel, 2.0);

    const Vec2 c = wp.H.apply({48.0, 48.0});
    const auto p_scene =
        relocate_patch(f_scene, 48.0, 48.0, 2.0, Mat2::identity(), 4.0, 12);
    const auto p_warp = relocate_patch(f_warp, c.x, c.y, 2.0, W, 4.0, 12);
    REQUIRE(p_scene.has_value());
    REQUIRE(p_warp.has_value());

    double se = 0.0, ref2 = 0.0;
    for (size_t i = 0; i < p_scene->gx.size(); ++i) {
        const double dx = p_scene->gx[i] - p_warp->gx[i];
        const double dy = p_scene->gy[i] - p_warp->gy[i];
        se += dx * dx + dy * dy;
        ref2 += p_scene->gx[i] * p_scene->gx[i] + p_scene->gy[i] * p_scene->gy[i];
    }
    CHECK(std::sqrt(se / ref2) < 0.25);  // resampling noise dominates
}

TEST_CASE("out-of-bounds patches are rejected") {
    const GrayImage img = synth::textured_image(64, 64, 1);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    CHECK_FALSE(relocate_patch(f, 3.0, 3.0, 2.0, Mat2::identity(), 6.0, 16).has_value());
}

TEST_CASE("orientation of a +x ramp is zero") {
    const GrayImage img = synth::ramp_image(96, 96, 1.0 / 96.0, 0.0);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    const auto oris = assign_orientations(f, 48.0, 48.0, 2.0, Mat2::identity());
    REQUIRE(oris.size() >= 1);
    const double half_bin = kPi / 36.0;
    const double wrapped = oris[0] > kPi ? oris[0] - 2.0 * kPi : oris[0];
    CHECK(std::abs(wrapped) <= half_bin + 1e-9);
}

TEST_CASE("two blended perpendicular ramps give two orientations 90 apart") {
    // left half climbs in +x, right half in +y, blended by a wide overlap
    GrayImage img(96, 96);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            const double wx = 0.5;
            img.at(x, y) = static_cast<float>(wx * x / 96.0 + (1.0 - wx) * y / 96.0);
        }
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    // gradients point diagonally; perturb the field test with a synthetic
    // field instead: half the samples +x, half +y
    GradientField synth_field = f;
    for (int y = 0; y < synth_field.gx.height(); ++y)
        for (int x = 0; x < synth_field.gx.width(); ++x) {
            const bool vertical = (x + y) % 2 == 0;
            synth_field.gx.at(x, y) = vertical ? 0.0f : 0.01f;
            synth_field.gy.at(x, y) = vertical ? 0.01f : 0.0f;
        }
    const auto oris = assign_orientations(synth_field, 48.0, 48.0, 3.0, Mat2::identity());
    REQUIRE(oris.size() == 2);
    double diff = std::abs(oris[0] - oris[1]);
    if (diff > kPi) diff = 2.0 * kPi - diff;
    CHECK(diff == doctest::Approx(kPi / 2.0).epsilon(0.1));
}

TEST_CASE("flat patch yields no orientations") {
    const GrayImage img(64, 64, 0.5f);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const GradientField f = affine_gradient_field(pyr, pyr.channel, 2.0);
    CHECK(assign_orientations(f, 32.0, 32.0, 2.0, Mat2::identity()).empty());
}

TEST_CASE("descriptor of a +x ramp concentrates in orientation bin 0") {
    GradientPatch patch;
    patch.side = 16;
    patch.gx.assign(256, 0.02f);
    patch.gy.assign(256, 0.0f);
    const auto bytes = build_descriptor(patch);
    REQUIRE(bytes.has_value());
    for (int cell = 0; cell < 16; ++cell) {
        const int base = cell * 8;
        const int b0 = (*bytes)[base];
        if (b0 == 0) continue;  // unpopulated corner cells
        for (int o = 1; o < 8; ++o)
            CHECK((*bytes)[base + o] <= 0.1 * b0 + 1.0);
    }
}

TEST_CASE("magnitude scaling does not change descriptor bytes") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    GradientPatch patch;
    patch.side = 16;
    patch.gx.resize(256);
    patch.gy.resize(256);
    for (int i = 0; i < 256; ++i) {
        patch.gx[i] = u(rng);
        patch.gy[i] = u(rng);
    }
    GradientPatch doubled = patch;
    for (float& v : doubled.gx) v *= 2.0f;
    for (float& v : doubled.gy) v *= 2.0f;
    const auto a = build_descriptor(patch);
    const auto b = build_descriptor(doubled);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    for (int i = 0; i < 128; ++i) CHECK(static_cast<int>((*a)[i]) == static_cast<int>((*b)[i]));
}

TEST_CASE("pre-quantization descriptor has unit norm") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    GradientPatch patch;
    patch.side = 16;
    patch.gx.resize(256);
    patch.gy.resize(256);
    for (int i = 0; i < 256; ++i) {
        patch.gx[i] = u(rng);
        patch.gy[i] = u(rng);
    }
    const auto raw = build_descriptor_raw(patch);
    REQUIRE(raw.has_value());
    double n = 0.0;
    for (float v : *raw) n += static_cast<double>(v) * v;
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    for (float v : *raw) CHECK(v >= 0.0f);
}

TEST_CASE("zero patch is rejected") {
    GradientPatch patch;
    patch.side = 16;
    patch.gx.assign(256, 0.0f);
    patch.gy.assign(256, 0.0f);
    CHECK_FALSE(build_descriptor(patch).has_value());
}

TEST_CASE("clamp-renormalize-quantize matches the scripted oracle") {
    // single-spike accumulator: normalize -> (1,0,...), clamp -> (0.2,0,...),
    // renormalize -> (1,0,...), quantize -> 512 saturated at 255
    std::array<double, 128> spike{};
    spike[0] = 1.0;
    const auto raw = normalize_clamp(spike);
    REQUIRE(raw.has_value());
    CHECK((*raw)[0] == doctest::Approx(1.0).epsilon(1e-9));
    const auto bytes = quantize_descriptor(*raw);
    CHECK(static_cast<int>(bytes[0]) == 255);
    for (int k = 1; k < 128; ++k) CHECK(static_cast<int>(bytes[k]) == 0);

    // random positive accumulators against the independent reference chain
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<double, 128> acc{};
        for (double& v : acc) v = u(rng) < 0.3 ? u(rng) : 0.0;
        acc[trial % 128] += 3.0;  // force the clamp to engage
        const auto got_raw = normalize_clamp(acc);
        REQUIRE(got_raw.has_value());
        const auto got = quantize_descriptor(*got_raw);
        const auto expect = reference_quantize(acc);
        for (int k = 0; k < 128; ++k)
            CHECK(static_cast<int>(got[k]) == static_cast<int>(expect[k]));
        double n = 0.0;
        for (float v : *got_raw) n += static_cast<double>(v) * v;
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("describe: multiple orientations produce multiple descriptors") {
    const GrayImage img = synth::textured_image(96, 96, 40);
    DetectorConfig cfg;
    cfg.channels = {AffineParams{Mat2::identity(), 1.0}};
    std::vector<Feature> feats = detect(img, cfg);
    REQUIRE(!feats.empty());
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0},
                                      std::min(cfg.n_octaves, max_octaves(96, 96)));
    const DescribeResult res = describe(feats, pyr);
    REQUIRE(!res.descriptors.empty());

    // descriptor count equals the sum of orientations of described features
    size_t expected = 0;
    std::vector<char> had_desc(feats.size(), 0);
    for (const Descriptor128& d : res.descriptors) had_desc[d.feature_index] = 1;
    for (size_t i = 0; i < feats.size(); ++i)
        if (had_desc[i]) expected += feats[i].orientations.size();
    // border drops can remove single orientations of a feature
    CHECK(res.descriptors.size() <= expected);
    for (const Descriptor128& d : res.descriptors) {
        const Feature& f = feats[d.feature_index];
        CHECK(d.x == doctest::Approx(f.x));
        CHECK(d.sigma == doctest::Approx(f.sigma));
    }
}

TEST_CASE("near-border features are dropped with a border reason") {
    const GrayImage img = synth::gaussian_blob_image(64, 64, {{6.0, 32.0, 3.0, -0.7}});
    DetectorConfig cfg;
    cfg.channels = {AffineParams{Mat2::identity(), 1.0}};
    std::vector<Feature> feats = detect(img, cfg);
    // manufacture a feature close to the border if detection skipped it
    if (feats.empty()) {
        Feature f;
        f.x = 6.0;
        f.y = 32.0;
        f.sigma = 2.2;
        f.octave = 0;
        f.kind = ExtremumKind::Max;
        f.channel = AffineParams{Mat2::identity(), 1.0};
        feats.push_back(f);
    }
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0}, 1);
    const DescribeResult res = describe(feats, pyr);
    bool border_drop = false;
    for (const auto& [idx, reason] : res.dropped)
        if (reason == DropReason::Border) border_drop = true;
    CHECK(border_drop);
}

TEST_CASE("rotation covariance: orientations shift by the rotation angle") {
    const GrayImage img = synth::textured_image(128, 128, 60);
    const double angle = kPi / 6.0;  // 30 degrees
    const synth::WarpedPair wp = synth::rotate_pair(img, angle);

    DetectorConfig cfg;
    cfg.channels = {AffineParams{Mat2::identity(), 1.0}};
    std::vector<Feature> fa = detect(img, cfg);
    std::vector<Feature> fb = detect(wp.image, cfg);
    const Pyramid pa = build_pyramid(img, {Mat2::identity(), 1.0},
                                     std::min(4, max_octaves(128, 128)));
    const Pyramid pb =
        build_pyramid(wp.image, {Mat2::identity(), 1.0},
                      std::min(4, max_octaves(wp.image.width(), wp.image.height())));
    describe(fa, pa);
    describe(fb, pb);

    int total = 0, good = 0;
    for (const Feature& f : fa) {
        if (f.orientations.empty()) continue;
        if (f.x < 20 || f.y < 20 || f.x > 108 || f.y > 108) continue;
        const Vec2 p = wp.H.apply({f.x, f.y});
        for (const Feature& g : fb) {
            if (g.orientations.empty()) continue;
            if (std::hypot(g.x - p.x, g.y - p.y) > 1.5 ||
                std::abs(g.sigma - f.sigma) > 0.25 * f.sigma)
                continue;
            ++total;
            // gradients rotate with the image: theta_b = theta_a + angle
            double expect = f.orientations[0] + angle;
            double diff = std::abs(std::remainder(g.orientations[0] - expect, 2.0 * kPi));
            if (diff <= 10.0 * kPi / 180.0) ++good;
            break;
        }
    }
    REQUIRE(total >= 10);
    CHECK(static_cast<double>(good) / total >= 0.8);
}

TEST_CASE("descriptors match across a 30-degree rotation") {
    const GrayImage img = synth::textured_image(128, 128, 61);
    const synth::WarpedPair wp = synth::rotate_pair(img, kPi / 6.0);

    DetectorConfig cfg;
    cfg.channels = {AffineParams{Mat2::identity(), 1.0}};
    std::vector<Feature> fa = detect(img, cfg);
    std::vector<Feature> fb = detect(wp.image, cfg);
    const Pyramid pa = build_pyramid(img, {Mat2::identity(), 1.0},
                                     std::min(4, max_octaves(128, 128)));
    const Pyramid pb =
        build_pyramid(wp.image, {Mat2::identity(), 1.0},
                      std::min(4, max_octaves(wp.image.width(), wp.image.height())));
    const DescribeResult da = describe(fa, pa);
    const DescribeResult db = describe(fb, pb);
    REQUIRE(da.descriptors.size() > 10);
    REQUIRE(db.descriptors.size() > 10);

    MatcherConfig mc;
    const std::vector<Match> matches = match_descriptors(da.descriptors, db.descriptors, mc);

    int correct = 0, total = 0;
    for (const Match& m : matches) {
        const Descriptor128& qa = da.descriptors[m.index_a];
        const Descriptor128& qb = db.descriptors[m.index_b];
        const Vec2 p = wp.H.apply({qa.x, qa.y});
        ++total;
        if (std::hypot(qb.x - p.x, qb.y - p.y) <= 3.0) ++correct;
    }
    REQUIRE(total >= 10);
    CHECK(static_cast<double>(correct) / total >= 0.7);
}

TEST_CASE("affine intensity change leaves descriptor bytes nearly unchanged") {
    const GrayImage img = synth::textured_image(96, 96, 62);
    GrayImage lit(96, 96);
    for (int i = 0; i < 96 * 96; ++i)
        lit.data()[i] = 0.5f * img.data()[i] + 0.2f;

    DetectorConfig cfg;
    cfg.channels = {AffineParams{Mat2::identity(), 1.0}};
    std::vector<Feature> feats = detect(img, cfg);
    REQUIRE(!feats.empty());
    std::vector<Feature> feats2 = feats;  // identical geometry on both images

    const int n_oct = std::min(cfg.n_octaves, max_octaves(96, 96));
    const Pyramid pa = build_pyramid(img, {Mat2::identity(), 1.0}, n_oct);
    const Pyramid pb = build_pyramid(lit, {Mat2::identity(), 1.0}, n_oct);
    const DescribeResult da = describe(feats, pa);
    const DescribeResult db = describe(feats2, pb);
    REQUIRE(da.descriptors.size() == db.descriptors.size());
    for (size_t i = 0; i < da.descriptors.size(); ++i)
        for (int k = 0; k < 128; ++k) {
            const int diff = std::abs(static_cast<int>(da.descriptors[i].values[k]) -
                                      static_cast<int>(db.descriptors[i].values[k]));
            CHECK(diff <= 2);
        }
}

TEST_CASE("descriptor file round trip preserves geometry and bytes") {
    const GrayImage img = synth::textured_image(96, 96, 63);
    DetectorConfig cfg;
    cfg.channels = {AffineParams{Mat2::identity(), 1.0}};
    std::vector<Feature> feats = detect(img, cfg);
    const Pyramid pyr = build_pyramid(img, {Mat2::identity(), 1.0},
                                      std::min(cfg.n_octaves, max_octaves(96, 96)));
    const DescribeResult res = describe(feats, pyr);
    REQUIRE(!res.descriptors.empty());
    save_descriptors(res.descriptors, "/tmp/affina_desc_round.txt");
    const auto back = load_descriptors("/tmp/affina_desc_round.txt");
    REQUIRE(back.size() == res.descriptors.size());
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].x == doctest::Approx(res.descriptors[i].x).epsilon(1e-5));
        CHECK(back[i].y == doctest::Approx(res.descriptors[i].y).epsilon(1e-5));
        for (int k = 0; k < 128; ++k)
            CHECK(back[i].values[k] == res.descriptors[i].values[k]);
    }
}

TEST_CASE("affine channel compensation separates true matches from noise") {
    const GrayImage img = synth::textured_image(128, 128, 64);
    const Mat2 W = Mat2::rotation(0.4) * Mat2::diag(1.7, 1.0);
    const synth::WarpedPair wp = synth::make_affine_pair(img, W);

    DetectorConfig ca;
    ca.channels = {AffineParams{Mat2::identity(), 1.0}};
    DetectorConfig cb;
    cb.channels = {AffineParams{W, 1.0}};

    std::vector<Feature> fa = detect(img, ca);
    std::vector<Feature> fb = detect(wp.image, cb);
    const Pyramid pa = build_pyramid(img, {Mat2::identity(), 1.0},
                                     std::min(4, max_octaves(128, 128)));
    const Pyramid pb = build_pyramid_warped(
        wp.image, {W, 1.0},
        std::min(4, max_octaves(warped_frame_dims(wp.image, {W, 1.0}).first,
                                warped_frame_dims(wp.image, {W, 1.0}).second)));
    const DescribeResult da = describe(fa, pa);
    const DescribeResult db = describe(fb, pb);
    REQUIRE(da.descriptors.size() > 10);
    REQUIRE(db.descriptors.size() > 10);

    // distance distribution of geometric correspondences vs random pairs
    std::vector<double> d_true, d_rand;
    std::mt19937 rng(9);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(db.descriptors.size()) - 1);
    auto l2 = [](const Descriptor128& a, const Descriptor128& b) {
        double acc = 0.0;
        for (int k = 0; k < 128; ++k) {
            const double d = static_cast<double>(a.values[k]) - b.values[k];
            acc += d * d;
        }
        return std::sqrt(acc);
    };
    for (const Descriptor128& qa : da.descriptors) {
        const Vec2 p = wp.H.apply({qa.x, qa.y});
        for (const Descriptor128& qb : db.descriptors) {
            if (std::hypot(qb.x - p.x, qb.y - p.y) <= 2.0 &&
                std::abs(qb.sigma - qa.sigma) < 0.3 * qa.sigma) {
                d_true.push_back(l2(qa, qb));
                d_rand.push_back(l2(qa, db.descriptors[pick(rng)]));
                break;
            }
        }
    }
    REQUIRE(d_true.size() >= 10);
    // AUC of true-vs-random separation
    int wins = 0, ties = 0;
    for (double t : d_true)
        for (double r : d_rand) {
            if (t < r) ++wins;
            if (t == r) ++ties;
        }
    const double auc = (wins + 0.5 * ties) /
                       (static_cast<double>(d_true.size()) * d_rand.size());
    CHECK(auc > 0.9);
}
