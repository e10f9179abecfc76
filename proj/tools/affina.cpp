// affina: affine-invariant feature detection, description, matching and
// geometric verification.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "affina/eval.hpp"
#include "affina/geomcheck.hpp"
#include "affina/mathutil.hpp"
#include "affina/threads.hpp"

using namespace affina;

namespace {

struct CommonOpts {
    int threads = 0;
    unsigned seed = 20240101;
};

void add_detector_opts(CLI::App* cmd, DetectorConfig& cfg, std::string& channels) {
    cmd->add_option("--channels", channels,
                    "channel set: 'default', 'identity', or 't,phi_deg;t,phi_deg;...'");
    cmd->add_option("--octaves", cfg.n_octaves, "pyramid octave count")
        ->check(CLI::Range(1, 10));
    cmd->add_option("--edge-ratio", cfg.edge_ratio, "edge response limit r_max");
    cmd->add_option("--contrast", cfg.contrast_floor, "absolute |response| floor");
    cmd->add_flag_callback("--no-warp", [&cfg] { cfg.warp_fast_path = false; },
                           "use dense anisotropic kernels instead of resampling");
}

std::vector<Vec2> coords_from_file(const std::string& path) {
    // descriptor files carry x y per row; feature files likewise
    std::ifstream probe(path);
    std::string first;
    std::getline(probe, first);
    probe.close();
    std::vector<Vec2> out;
    if (first.rfind("# affina features", 0) == 0) {
        for (const Feature& f : load_features(path)) out.push_back({f.x, f.y});
    } else {
        for (const Descriptor128& d : load_descriptors(path)) out.push_back({d.x, d.y});
    }
    return out;
}

int run_selftest(unsigned seed);

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"affine-invariant feature matching pipeline"};
    app.require_subcommand(1);
    app.set_config("--config")->configurable(false);
    app.allow_config_extras(CLI::config_extras_mode::error);  // strict key=value parsing

    CommonOpts common;
    app.add_option("--threads", common.threads, "worker thread cap (0 = auto)");
    app.add_option("--seed", common.seed, "seed for randomized self tests");

    // ---- detect ----
    auto* cmd_detect = app.add_subcommand("detect", "detect features in an image");
    std::string det_img, det_out = "feats.txt", det_channels = "default", det_dump;
    DetectorConfig det_cfg;
    cmd_detect->add_option("image", det_img, "input image (PGM/PPM/PNG)")->required();
    cmd_detect->add_option("--out", det_out, "output feature file");
    add_detector_opts(cmd_detect, det_cfg, det_channels);
    cmd_detect->add_option("--dump-pyramid", det_dump, "directory for raster dumps");

    // ---- describe ----
    auto* cmd_desc = app.add_subcommand("describe", "compute descriptors for features");
    std::string dsc_img, dsc_feats, dsc_out = "desc.txt";
    int dsc_octaves = 4;
    bool dsc_nowarp = false;
    cmd_desc->add_option("image", dsc_img)->required();
    cmd_desc->add_option("feats", dsc_feats)->required();
    cmd_desc->add_option("--out", dsc_out, "output descriptor file");
    cmd_desc->add_option("--octaves", dsc_octaves)->check(CLI::Range(1, 10));
    cmd_desc->add_flag("--no-warp", dsc_nowarp);

    // ---- match ----
    auto* cmd_match = app.add_subcommand("match", "match two descriptor files");
    std::string m_a, m_b, m_out = "matches.txt";
    MatcherConfig m_cfg;
    cmd_match->add_option("a", m_a)->required();
    cmd_match->add_option("b", m_b)->required();
    cmd_match->add_option("--out", m_out);
    cmd_match->add_option("--ratio", m_cfg.ratio_max, "nearest/second-nearest limit");
    cmd_match->add_flag("--mutual", m_cfg.mutual_check, "mutual-best cross check");

    // ---- verify ----
    auto* cmd_verify = app.add_subcommand("verify", "DISTRAT geometric verification");
    std::string v_matches, v_a, v_b, v_out = "inliers.txt";
    VerifyConfig v_cfg;
    cmd_verify->add_option("matches", v_matches)->required();
    cmd_verify->add_option("feats_a", v_a, "descriptor or feature file of image A")
        ->required();
    cmd_verify->add_option("feats_b", v_b, "descriptor or feature file of image B")
        ->required();
    cmd_verify->add_option("--out", v_out);
    cmd_verify->add_option("--bins", v_cfg.K, "LDR histogram bins")->check(CLI::Range(5, 201));
    cmd_verify->add_option("--range", v_cfg.z_range, "LDR histogram half range");
    cmd_verify->add_option("--alpha", v_cfg.alpha, "chi-square significance");

    // ---- evaluate ----
    auto* cmd_eval = app.add_subcommand("evaluate", "run the repeatability protocol");
    std::string e_dir, e_out = "report.csv", e_channels = "default", e_dump;
    EvalConfig e_cfg;
    cmd_eval->add_option("seq_dir", e_dir, "Oxford-layout sequence directory")->required();
    cmd_eval->add_option("--out", e_out);
    add_detector_opts(cmd_eval, e_cfg.detector, e_channels);
    cmd_eval->add_option("--ratio", e_cfg.matcher.ratio_max);
    cmd_eval->add_option("--overlap", e_cfg.overlap_max, "max region overlap error");
    cmd_eval->add_option("--dump-matches", e_dump, "directory for match visualizations");

    // ---- selftest ----
    auto* cmd_self = app.add_subcommand("selftest", "run the built-in oracle suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion" ? 0 : 2;
    }

    set_thread_count(common.threads);

    try {
        if (cmd_detect->parsed()) {
            det_cfg.channels = parse_channels(det_channels);
            const GrayImage img = load_image(det_img);
            const std::vector<Feature> feats = detect(img, det_cfg);
            if (!det_dump.empty()) {
                std::filesystem::create_directories(det_dump);
                for (const AffineParams& ch : det_cfg.channels) {
                    const auto [fw, fh] = warped_frame_dims(img, ch);
                    const int n = std::min(det_cfg.n_octaves, max_octaves(fw, fh));
                    if (n < 1) continue;
                    const Pyramid pyr = det_cfg.warp_fast_path
                                            ? build_pyramid_warped(img, ch, n)
                                            : build_pyramid(img, ch, n);
                    dump_pyramid(pyr, det_dump);
                    break;  // first channel only; enough for inspection
                }
            }
            save_features(feats, det_out);
            std::cout << feats.size() << " features -> " << det_out << "\n";
        } else if (cmd_desc->parsed()) {
            const GrayImage img = load_image(dsc_img);
            std::vector<Feature> feats = load_features(dsc_feats);
            // group features by channel, one pyramid per channel
            std::vector<Descriptor128> all;
            std::vector<char> done(feats.size(), 0);
            for (size_t i = 0; i < feats.size(); ++i) {
                if (done[i]) continue;
                const Mat2 A = feats[i].channel.A;
                std::vector<size_t> group;
                for (size_t j = i; j < feats.size(); ++j) {
                    if (done[j]) continue;
                    const Mat2& B = feats[j].channel.A;
                    if (std::abs(A.a - B.a) < 1e-9 && std::abs(A.b - B.b) < 1e-9 &&
                        std::abs(A.c - B.c) < 1e-9 && std::abs(A.d - B.d) < 1e-9) {
                        group.push_back(j);
                        done[j] = 1;
                    }
                }
                int max_oct = 0;
                for (size_t j : group) max_oct = std::max(max_oct, feats[j].octave);
                const AffineParams ch = feats[i].channel;
                const auto [fw, fh] = warped_frame_dims(img, ch);
                const int n = std::min(std::max(max_oct + 1, dsc_octaves),
                                       max_octaves(fw, fh));
                if (n < 1) continue;
                const Pyramid pyr = dsc_nowarp ? build_pyramid(img, ch, n)
                                               : build_pyramid_warped(img, ch, n);
                std::vector<Feature> sub;
                sub.reserve(group.size());
                for (size_t j : group) sub.push_back(feats[j]);
                DescribeResult dr = describe(sub, pyr);
                for (size_t gi = 0; gi < group.size(); ++gi)
                    feats[group[gi]].orientations = sub[gi].orientations;
                for (Descriptor128& d : dr.descriptors) {
                    d.feature_index = static_cast<int>(group[d.feature_index]);
                    all.push_back(std::move(d));
                }
            }
            std::sort(all.begin(), all.end(),
                      [](const Descriptor128& a, const Descriptor128& b) {
                          if (a.feature_index != b.feature_index)
                              return a.feature_index < b.feature_index;
                          return a.theta < b.theta;
                      });
            save_descriptors(all, dsc_out);
            std::cout << all.size() << " descriptors -> " << dsc_out << "\n";
        } else if (cmd_match->parsed()) {
            const auto da = load_descriptors(m_a);
            const auto db = load_descriptors(m_b);
            const std::vector<Match> matches = match_descriptors(da, db, m_cfg);
            save_matches(matches, m_out);
            std::cout << matches.size() << " matches -> " << m_out << "\n";
        } else if (cmd_verify->parsed()) {
            const std::vector<Match> matches = load_matches(v_matches);
            const std::vector<Vec2> ca = coords_from_file(v_a);
            const std::vector<Vec2> cb = coords_from_file(v_b);
            std::vector<Vec2> X, Y;
            for (const Match& m : matches) {
                if (m.index_a < 0 || m.index_a >= static_cast<int>(ca.size()) ||
                    m.index_b < 0 || m.index_b >= static_cast<int>(cb.size()))
                    throw DomainError("match indices out of range for coordinate files");
                X.push_back(ca[m.index_a]);
                Y.push_back(cb[m.index_b]);
            }
            const VerifyResult res = distrat_verify(X, Y, v_cfg);
            std::ofstream out(v_out);
            if (!out) throw IoError("cannot write " + v_out);
            char buf[160];
            std::snprintf(buf, sizeof(buf), "# %d %.2f %.4f %.4f %s%s\n", res.n,
                          res.m_hat, res.beta, res.chi2, res.pass ? "pass" : "reject",
                          res.low_confidence ? " low-confidence" : "");
            out << buf;
            for (int idx : res.inlier_indices) out << idx << "\n";
            std::snprintf(buf, sizeof(buf), "N=%d m_hat=%.2f beta=%.4f chi2=%.4f %s\n",
                          res.n, res.m_hat, res.beta, res.chi2,
                          res.pass ? "pass" : "reject");
            std::cout << buf;
        } else if (cmd_eval->parsed()) {
            e_cfg.detector.channels = parse_channels(e_channels);
            if (!e_dump.empty()) {
                std::filesystem::create_directories(e_dump);
                e_cfg.dump_dir = e_dump;
            }
            const Sequence seq = load_sequence(e_dir);
            const EvalReport rep = evaluate(seq, e_cfg);
            emit_report(rep, e_out);
            std::cout << rep.rows.size() << " pairs -> " << e_out << "\n";
        } else if (cmd_self->parsed()) {
            return run_selftest(common.seed);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

namespace {

struct SelfTest {
    int failures = 0;
    void check(bool ok, const char* name) {
        std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
        if (!ok) ++failures;
    }
};

int run_selftest(unsigned seed) {
    SelfTest t;
    std::mt19937 rng(seed);

    {  // polynomial parameter matrix inverts the Vandermonde map
        const std::array<double, 4> scales{1.0, 2.0, 3.0, 4.0};
        const PolyParamMatrix M = compute_poly_param_matrix(scales);
        double worst = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const double s = scales[k];
                    const double vand[4] = {s * s * s, s * s, s, 1.0};
                    acc += M.m[i][k] * vand[j];
                }
                worst = std::max(worst, std::abs(acc - (i == j ? 1.0 : 0.0)));
            }
        t.check(worst < 1e-9, "poly parameter matrix inverse");
    }
    {  // anisotropic kernel second moments match A sigma^2 A^T
        const AffineParams a{Mat2::diag(2.0, 1.0), 1.5};
        const Kernel2D k = anisotropic_gaussian_kernel(a);
        double mxx = 0.0, myy = 0.0;
        for (int dy = -k.radius; dy <= k.radius; ++dy)
            for (int dx = -k.radius; dx <= k.radius; ++dx) {
                const double w = k.at(dx, dy);
                mxx += w * dx * dx;
                myy += w * dy * dy;
            }
        const double exx = 4.0 * a.sigma * a.sigma, eyy = a.sigma * a.sigma;
        t.check(std::abs(mxx / exx - 1.0) < 0.02 && std::abs(myy / eyy - 1.0) < 0.02,
                "anisotropic kernel second moments");
    }
    {  // outlier pdf closed form vs Simpson quadrature of sech^2/2
        const auto f = outlier_pdf(25, -2.5, 2.5);
        double worst = 0.0;
        for (int k = 0; k < 25; ++k) {
            const double a = -2.5 + k * 0.2, b = a + 0.2;
            const int n = 2000;
            double acc = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double z = a + (b - a) * i / n;
                const double c = std::cosh(z);
                const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                acc += w * 0.5 / (c * c);
            }
            acc *= (b - a) / (3.0 * n);
            worst = std::max(worst, std::abs(acc - f[k]));
        }
        t.check(worst < 1e-9, "outlier pdf vs quadrature");
    }
    t.check(std::abs(chi2_quantile(0.99, 24) - 42.97982) < 1e-4, "chi-square quantile");
    {  // extremum test hand cases
        auto mk = [](double p1, double p2, double n1, double n2) {
            LocalMatrices m;
            m.hxx = p1;
            m.hyy = p2;
            m.n11 = n1;
            m.n22 = n2;
            return m;
        };
        bool ok = extremum_test(mk(-4, -4, 1, 1)) == ExtremumKind::Max &&
                  extremum_test(mk(2, 6, 0.5, 0.5)) == ExtremumKind::Min &&
                  extremum_test(mk(-1, -1, 3, 0.1)) == ExtremumKind::None &&
                  extremum_test(mk(-2, -2, 1, 1)) == ExtremumKind::None;
        t.check(ok, "eigenvalue extremum test");
    }
    {  // matcher recovers planted duplicates
        std::vector<Descriptor128> a(20), b(100);
        std::uniform_int_distribution<int> byte(0, 200);
        for (auto& d : b)
            for (auto& v : d.values) v = static_cast<uint8_t>(byte(rng));
        std::uniform_int_distribution<int> jitter(-2, 2);
        for (int i = 0; i < 20; ++i) {
            a[i] = b[i * 5];
            for (auto& v : a[i].values)
                v = static_cast<uint8_t>(std::clamp(v + jitter(rng), 0, 255));
        }
        MatcherConfig mc;
        const auto matches = match_descriptors(a, b, mc);
        bool ok = matches.size() == 20;
        for (const Match& m : matches) ok = ok && m.index_b == m.index_a * 5;
        t.check(ok, "planted-match recovery");
    }
    {  // LDR basics and the projection identity
        std::vector<Vec2> X;
        std::uniform_real_distribution<double> u(0.0, 100.0);
        for (int i = 0; i < 10; ++i) X.push_back({u(rng), u(rng)});
        std::vector<Vec2> Y;
        for (const Vec2& p : X) Y.push_back(p * 2.0);
        const LdrMatrix m = compute_ldr(X, Y);
        bool ok = true;
        for (int i = 0; i < m.n && ok; ++i)
            for (int j = i + 1; j < m.n; ++j)
                ok = ok && std::abs(m.at(i, j) - std::log(0.5)) < 1e-5;
        const auto f = outlier_pdf(25, -2.5, 2.5);
        std::vector<double> h(f);
        for (auto& v : h) v *= 7.0;
        ok = ok && std::abs(estimate_beta(h, f) - 7.0) < 1e-9;
        t.check(ok, "log distance ratios and beta projection");
    }
    {  // impulse reproduces the kernel; separable path agrees with dense
        GrayImage img(33, 33, 0.0f);
        img.at(16, 16) = 1.0f;
        const AffineParams a{Mat2::identity(), 1.6};
        const Kernel2D k = anisotropic_gaussian_kernel(a);
        const GrayImage dense = convolve(img, k);
        double worst = 0.0;
        for (int dy = -k.radius; dy <= k.radius; ++dy)
            for (int dx = -k.radius; dx <= k.radius; ++dx)
                worst = std::max(worst,
                                 std::abs(dense.at(16 + dx, 16 + dy) - k.at(dx, dy)));
        const auto g = gaussian_kernel_1d(1.6, 0);
        const GrayImage sep = convolve_separable(img, g, g);
        double worst2 = 0.0;
        for (size_t i = 0; i < sep.size(); ++i)
            worst2 = std::max(worst2,
                              static_cast<double>(std::abs(sep.data()[i] - dense.data()[i])));
        t.check(worst < 1e-6 && worst2 < 1e-6, "convolution impulse and separable paths");
    }

    std::printf("%s\n", t.failures ? "SELFTEST FAILED" : "selftest passed");
    return t.failures ? 1 : 0;
}

}  // namespace
