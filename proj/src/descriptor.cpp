#include "affina/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace affina {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kOriBins = 36;
constexpr double kOriPeakRatio = 0.8;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriRegionFactor = 1.5;  // half of the 3-sigma square
constexpr int kPatchSide = 16;
constexpr double kPatchHalfExtent = 6.0;  // in units of sigma
constexpr double kClampThreshold = 0.2f;
constexpr double kQuantScale = 512.0;

int pick_octave(const Pyramid& pyr, double sigma) {
    for (size_t o = 0; o < pyr.octaves.size(); ++o) {
        const double s_oct = sigma / std::ldexp(1.0, static_cast<int>(o));
        if (s_oct >= kScaleLadder[0] - 1e-9 && s_oct <= kScaleLadder[3] + 1e-9)
            return static_cast<int>(o);
    }
    throw DomainError("scale out of pyramid range");
}

}  // namespace

GradientField gradient_field_roi(const Pyramid& pyr, int octave, double sigma_oct,
                                 int x0, int y0, int w, int h) {
    const OctavePoly& polys = pyr.polys[octave];
    const int ow = polys.gx.w, oh = polys.gx.h;
    x0 = std::clamp(x0, 0, ow - 1);
    y0 = std::clamp(y0, 0, oh - 1);
    w = std::clamp(w, 1, ow - x0);
    h = std::clamp(h, 1, oh - y0);

    GradientField f;
    f.octave = octave;
    f.sigma_oct = sigma_oct;
    f.x0 = x0;
    f.y0 = y0;
    f.gx = GrayImage(w, h);
    f.gy = GrayImage(w, h);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
        float* gxr = f.gx.row(y);
        float* gyr = f.gy.row(y);
        for (int x = 0; x < w; ++x) {
            gxr[x] = static_cast<float>(polys.gx.eval_at(x0 + x, y0 + y, sigma_oct));
            gyr[x] = static_cast<float>(polys.gy.eval_at(x0 + x, y0 + y, sigma_oct));
        }
    }
    return f;
}

GradientField affine_gradient_field(const Pyramid& pyr, const AffineParams& a,
                                    double sigma) {
    (void)a;  // the pyramid already carries the channel's stacks
    const int o = pick_octave(pyr, sigma);
    const double s_oct = sigma / std::ldexp(1.0, o);
    const OctavePoly& polys = pyr.polys[o];
    return gradient_field_roi(pyr, o, s_oct, 0, 0, polys.gx.w, polys.gx.h);
}

std::optional<GradientPatch> relocate_patch(const GradientField& field, double fx,
                                            double fy, double sigma_oct,
                                            const Mat2& a_prime, double half_extent,
                                            int side) {
    const double he = half_extent * sigma_oct;
    const double step = side > 1 ? 2.0 * he / (side - 1) : 0.0;
    const Mat2 rot = a_prime.polar_rotation();
    const Mat2 unrot = rot.transpose();

    GradientPatch patch;
    patch.side = side;
    patch.gx.resize(static_cast<size_t>(side) * side);
    patch.gy.resize(static_cast<size_t>(side) * side);

    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const Vec2 delta{-he + j * step, -he + i * step};
            const Vec2 p = a_prime * delta + Vec2{fx, fy};
            double gx, gy;
            if (!field.sample(p.x, p.y, gx, gy)) return std::nullopt;
            const Vec2 steered = unrot * Vec2{gx, gy};
            patch.gx[static_cast<size_t>(i) * side + j] = static_cast<float>(steered.x);
            patch.gy[static_cast<size_t>(i) * side + j] = static_cast<float>(steered.y);
        }
    }
    return patch;
}

std::vector<double> assign_orientations(const GradientField& field, double fx,
                                        double fy, double sigma_oct,
                                        const Mat2& channel_frame) {
    std::array<double, kOriBins> hist{};
    const int r = std::max(1, static_cast<int>(std::lround(kOriRegionFactor * sigma_oct)));
    const double ws = kOriSigmaFactor * sigma_oct;

    for (int db = -r; db <= r; ++db) {
        for (int da = -r; da <= r; ++da) {
            const Vec2 p = channel_frame * Vec2{static_cast<double>(da),
                                                static_cast<double>(db)} +
                           Vec2{fx, fy};
            double gx, gy;
            if (!field.sample(p.x, p.y, gx, gy)) continue;
            const double mag = std::hypot(gx, gy);
            if (mag <= 0.0) continue;
            const double w = std::exp(-(da * da + db * db) / (2.0 * ws * ws));
            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += 2.0 * kPi;
            int bin = static_cast<int>(theta / (2.0 * kPi) * kOriBins);
            if (bin >= kOriBins) bin = 0;
            hist[bin] += w * mag;
        }
    }

    // one smoothing pass keeps the 80% rule stable under noise
    std::array<double, kOriBins> smooth{};
    for (int k = 0; k < kOriBins; ++k) {
        const double prev = hist[(k + kOriBins - 1) % kOriBins];
        const double next = hist[(k + 1) % kOriBins];
        smooth[k] = 0.25 * prev + 0.5 * hist[k] + 0.25 * next;
    }

    const double peak = *std::max_element(smooth.begin(), smooth.end());
    if (peak <= 1e-10) return {};  // flat patch: only float noise in the bins

    std::vector<std::pair<double, double>> found;  // (value, theta)
    for (int k = 0; k < kOriBins; ++k) {
        const double prev = smooth[(k + kOriBins - 1) % kOriBins];
        const double next = smooth[(k + 1) % kOriBins];
        const double v = smooth[k];
        if (!(v > prev && v > next)) continue;
        if (v < kOriPeakRatio * peak) continue;
        double dm = -0.5 * (next - prev) / (0.5 * (next + prev) - v);
        if (std::abs(dm) > 0.5) dm = 0.0;  // offset rejected, keep the raw peak
        double theta = (k + dm) * 2.0 * kPi / kOriBins;
        if (theta < 0.0) theta += 2.0 * kPi;
        if (theta >= 2.0 * kPi) theta -= 2.0 * kPi;
        found.emplace_back(v, theta);
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::vector<double> out;
    out.reserve(found.size());
    for (const auto& [v, th] : found) out.push_back(th);
    return out;
}

std::optional<std::array<float, 128>> normalize_clamp(const std::array<double, 128>& acc) {
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) return std::nullopt;

    std::array<float, 128> out;
    double norm2 = 0.0;
    for (int k = 0; k < 128; ++k) {
        const double v = std::min(acc[k] / norm, kClampThreshold);
        out[k] = static_cast<float>(v);
        norm2 += v * v;
    }
    norm2 = std::sqrt(norm2);
    if (norm2 < 1e-12) return std::nullopt;
    for (auto& v : out) v = static_cast<float>(v / norm2);
    return out;
}

std::array<uint8_t, 128> quantize_descriptor(const std::array<float, 128>& raw) {
    std::array<uint8_t, 128> out;
    for (int k = 0; k < 128; ++k) {
        const long q = std::lround(kQuantScale * raw[k]);
        out[k] = static_cast<uint8_t>(std::min(q, 255L));
    }
    return out;
}

std::optional<std::array<float, 128>> build_descriptor_raw(const GradientPatch& patch) {
    const int side = patch.side;
    std::array<double, 128> acc{};
    const double cell_span = static_cast<double>(side) / 4.0;
    const double wsigma = 2.0;  // cells; half the 4-cell patch width

    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            const float gx = patch.gx[static_cast<size_t>(i) * side + j];
            const float gy = patch.gy[static_cast<size_t>(i) * side + j];
            const double mag = std::hypot(gx, gy);
            if (mag <= 0.0) continue;

            // cell coordinates in [-0.5, 3.5]
            const double cu = (j + 0.5) / cell_span - 0.5;
            const double cv = (i + 0.5) / cell_span - 0.5;
            const double w = std::exp(-((cu - 1.5) * (cu - 1.5) + (cv - 1.5) * (cv - 1.5)) /
                                      (2.0 * wsigma * wsigma));

            double theta = std::atan2(gy, gx);
            if (theta < 0.0) theta += 2.0 * kPi;
            const double ob = theta / (2.0 * kPi) * 8.0;

            const int u0 = static_cast<int>(std::floor(cu));
            const int v0 = static_cast<int>(std::floor(cv));
            const int o0 = static_cast<int>(std::floor(ob)) % 8;
            const double fu = cu - u0, fv = cv - v0, fo = ob - std::floor(ob);

            for (int du = 0; du < 2; ++du) {
                const int u = u0 + du;
                if (u < 0 || u > 3) continue;
                const double wu = du ? fu : 1.0 - fu;
                for (int dv = 0; dv < 2; ++dv) {
                    const int v = v0 + dv;
                    if (v < 0 || v > 3) continue;
                    const double wv = dv ? fv : 1.0 - fv;
                    for (int dob = 0; dob < 2; ++dob) {
                        const int o = (o0 + dob) % 8;
                        const double wo = dob ? fo : 1.0 - fo;
                        acc[(static_cast<size_t>(v) * 4 + u) * 8 + o] +=
                            mag * w * wu * wv * wo;
                    }
                }
            }
        }
    }

    return normalize_clamp(acc);
}

std::optional<std::array<uint8_t, 128>> build_descriptor(const GradientPatch& patch) {
    const auto raw = build_descriptor_raw(patch);
    if (!raw) return std::nullopt;
    return quantize_descriptor(*raw);
}

DescribeResult describe(std::vector<Feature>& feats, const Pyramid& pyr) {
    DescribeResult res;
    const Mat2 A_frame = pyr.build_params.A;
    const double frame_norm = A_frame.spectral_norm();

    for (size_t i = 0; i < feats.size(); ++i) {
        Feature& f = feats[i];
        const int o = f.octave;
        if (o < 0 || o >= static_cast<int>(pyr.octaves.size())) {
            res.dropped.emplace_back(i, DropReason::ScaleRange);
            continue;
        }
        const double s_oct = f.sigma / std::ldexp(1.0, o);
        if (s_oct < kScaleLadder[0] - 0.1 || s_oct > kScaleLadder[3] + 0.1) {
            res.dropped.emplace_back(i, DropReason::ScaleRange);
            continue;
        }
        const Vec2 pf = pyr.to_frame({f.x, f.y});
        const double fx = frame_to_octave_coord(pf.x, o);
        const double fy = frame_to_octave_coord(pf.y, o);

        const int reach = static_cast<int>(std::ceil(
                              frame_norm * kPatchHalfExtent * s_oct * std::sqrt(2.0))) + 2;
        const GradientField field =
            gradient_field_roi(pyr, o, s_oct, static_cast<int>(fx) - reach,
                               static_cast<int>(fy) - reach, 2 * reach + 2, 2 * reach + 2);

        f.orientations = assign_orientations(field, fx, fy, s_oct, A_frame);
        if (f.orientations.empty()) {
            res.dropped.emplace_back(i, DropReason::NoOrientation);
            continue;
        }

        for (double theta : f.orientations) {
            const Mat2 a_prime = A_frame * Mat2::rotation(theta);
            const auto patch =
                relocate_patch(field, fx, fy, s_oct, a_prime, kPatchHalfExtent, kPatchSide);
            if (!patch) {
                res.dropped.emplace_back(i, DropReason::Border);
                continue;
            }
            const auto bytes = build_descriptor(*patch);
            if (!bytes) {
                res.dropped.emplace_back(i, DropReason::ZeroNorm);
                continue;
            }
            Descriptor128 d;
            d.values = *bytes;
            d.x = f.x;
            d.y = f.y;
            d.sigma = f.sigma;
            d.theta = theta;
            d.channel = f.channel;
            d.feature_index = static_cast<int>(i);
            res.descriptors.push_back(std::move(d));
        }
    }
    return res;
}

void save_descriptors(const std::vector<Descriptor128>& descs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << 128 << "\n" << descs.size() << "\n";
    char buf[160];
    for (const Descriptor128& d : descs) {
        // scale ellipse a x^2 + 2 b x y + c y^2 = 1 of the channel-mapped disk
        const Mat2 AAt = d.channel.A * d.channel.A.transpose();
        const Mat2 E = AAt.inverse() * (1.0 / (d.sigma * d.sigma));
        std::snprintf(buf, sizeof(buf), "%.6f %.6f %.10g %.10g %.10g", d.x, d.y,
                      E.a, E.b, E.d);
        out << buf;
        for (uint8_t v : d.values) out << ' ' << static_cast<int>(v);
        out << "\n";
    }
}

std::vector<Descriptor128> load_descriptors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    int dim = 0;
    size_t n = 0;
    if (!(in >> dim >> n) || dim != 128)
        throw FormatError("bad descriptor file header: " + path);
    std::vector<Descriptor128> out(n);
    for (size_t i = 0; i < n; ++i) {
        double a, b, c;
        if (!(in >> out[i].x >> out[i].y >> a >> b >> c))
            throw FormatError("truncated descriptor file: " + path);
        for (int k = 0; k < 128; ++k) {
            int v;
            if (!(in >> v)) throw FormatError("truncated descriptor file: " + path);
            out[i].values[k] = static_cast<uint8_t>(std::clamp(v, 0, 255));
        }
        out[i].feature_index = static_cast<int>(i);
    }
    return out;
}

namespace ref {

void gradient_direct(const GrayImage& img, double sigma, GrayImage& gx, GrayImage& gy) {
    AffineParams a{Mat2::identity(), sigma};
    gx = ref::convolve_dense_serial(img, make_affine_kernel(a, KernelFamily::GaussDx));
    gy = ref::convolve_dense_serial(img, make_affine_kernel(a, KernelFamily::GaussDy));
}

}  // namespace ref

}  // namespace affina
