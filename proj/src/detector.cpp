#include "affina/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace affina {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDedupDist = 2.0;       // px
constexpr double kDedupScaleRatio = 1.2; // 20% relative scale
constexpr int kMaxRefineSteps = 5;

int detect_margin() { return 5; }

}  // namespace

std::vector<AffineParams> default_channels() {
    std::vector<AffineParams> out;
    out.emplace_back(Mat2::identity(), 1.0);
    const double tilts[] = {std::sqrt(2.0), 2.0};
    for (double t : tilts)
        for (int k = 0; k < 4; ++k) {
            const double phi = k * kPi / 4.0;
            out.emplace_back(Mat2::rotation(phi) * Mat2::diag(t, 1.0), 1.0);
        }
    return out;
}

std::vector<AffineParams> parse_channels(const std::string& text) {
    if (text.empty() || text == "default") return default_channels();
    if (text == "identity") return {AffineParams{Mat2::identity(), 1.0}};
    std::vector<AffineParams> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';')) {
        if (item.empty()) continue;
        double t = 1.0, phi_deg = 0.0;
        if (std::sscanf(item.c_str(), "%lf,%lf", &t, &phi_deg) != 2)
            throw DomainError("bad channel spec '" + item + "' (want t,phi_deg)");
        if (!(t > 0.0)) throw DomainError("channel tilt must be positive");
        out.emplace_back(Mat2::rotation(phi_deg * kPi / 180.0) * Mat2::diag(t, 1.0), 1.0);
    }
    if (out.empty()) throw DomainError("empty channel list");
    return out;
}

LocalMatrices local_matrices(const OctavePoly& polys, double x, double y,
                             double sigma, int window_radius) {
    const PolyField& dx = polys.dx;
    if (x < window_radius || y < window_radius || x > dx.w - 1 - window_radius ||
        y > dx.h - 1 - window_radius)
        throw DomainError("local_matrices too close to border");

    LocalMatrices m;
    m.hxx = polys.dxx.eval(x, y, sigma);
    m.hxy = polys.dxy.eval(x, y, sigma);
    m.hyy = polys.dyy.eval(x, y, sigma);

    if (window_radius == 0) {
        const double gx = polys.dx.eval(x, y, sigma);
        const double gy = polys.dy.eval(x, y, sigma);
        m.n11 = gx * gx;
        m.n12 = gx * gy;
        m.n22 = gy * gy;
        return m;
    }

    const double ws = 1.5 * sigma;
    double wsum = 0.0;
    for (int j = -window_radius; j <= window_radius; ++j) {
        for (int i = -window_radius; i <= window_radius; ++i) {
            const double w = std::exp(-(i * i + j * j) / (2.0 * ws * ws));
            const double gx = polys.dx.eval(x + i, y + j, sigma);
            const double gy = polys.dy.eval(x + i, y + j, sigma);
            m.n11 += w * gx * gx;
            m.n12 += w * gx * gy;
            m.n22 += w * gy * gy;
            wsum += w;
        }
    }
    m.n11 /= wsum;
    m.n12 /= wsum;
    m.n22 /= wsum;
    return m;
}

ExtremumKind extremum_test(const LocalMatrices& m) {
    const auto psi = m.psi();
    const auto nu = m.nu();
    const double lhs = 0.25 * psi[0] * psi[0];  // psi[0] = min eigenvalue
    const double rhs = std::max(nu[0], nu[1]);
    if (!(lhs > rhs)) return ExtremumKind::None;
    if (psi[1] < 0.0) return ExtremumKind::Max;
    if (psi[1] > 0.0) return ExtremumKind::Min;
    return ExtremumKind::None;
}

bool edge_response_filter(double hxx, double hxy, double hyy, double r_max) {
    const double det = hxx * hyy - hxy * hxy;
    if (det <= 0.0) return false;
    const double tr = hxx + hyy;
    return tr * tr / det < (r_max + 1.0) * (r_max + 1.0) / r_max;
}

namespace {

// Picks the root matching the requested kind, if any.
std::optional<double> solve_kind_at(const OctavePoly& polys, double x, double y,
                                    ExtremumKind kind) {
    double co[4];
    polys.log.coeffs(x, y, co);
    const ExtremalScales es =
        solve_extremal_from_coeffs(co, kScaleLadder[0], kScaleLadder[3]);
    return kind == ExtremumKind::Max ? es.sigma_max : es.sigma_min;
}

}  // namespace

std::optional<RefinedCandidate> refine_subpixel(const OctavePoly& polys, int x,
                                                int y, ExtremumKind kind,
                                                int margin) {
    int cx = x, cy = y;
    for (int step = 0; step < kMaxRefineSteps; ++step) {
        if (cx < margin || cy < margin || cx >= polys.log.w - margin ||
            cy >= polys.log.h - margin)
            return std::nullopt;  // drifted out of bounds

        const auto sig = solve_kind_at(polys, cx, cy, kind);
        if (!sig) return std::nullopt;
        const double s = *sig;

        const double gx = polys.dx.eval_at(cx, cy, s);
        const double gy = polys.dy.eval_at(cx, cy, s);
        const double hxx = polys.dxx.eval_at(cx, cy, s);
        const double hxy = polys.dxy.eval_at(cx, cy, s);
        const double hyy = polys.dyy.eval_at(cx, cy, s);
        const double det = hxx * hyy - hxy * hxy;
        if (std::abs(det) < 1e-14) return std::nullopt;  // singular Hessian

        const double ox = -(hyy * gx - hxy * gy) / det;
        const double oy = -(-hxy * gx + hxx * gy) / det;

        if (std::abs(ox) <= 0.5 && std::abs(oy) <= 0.5) {
            RefinedCandidate rc;
            rc.x = cx + ox;
            rc.y = cy + oy;
            const auto fs = solve_kind_at(polys, rc.x, rc.y, kind);
            if (!fs) return std::nullopt;
            rc.sigma = *fs;
            return rc;
        }
        // real extremum is closer to a neighboring sample; re-center
        cx += ox > 0.5 ? 1 : (ox < -0.5 ? -1 : 0);
        cy += oy > 0.5 ? 1 : (oy < -0.5 ? -1 : 0);
    }
    return std::nullopt;
}

std::vector<Feature> scan_pyramid(const Pyramid& pyr, const DetectorConfig& cfg) {
    struct Candidate {
        double x, y, sigma, response;
        ExtremumKind kind;
        int octave;
    };
    std::vector<Candidate> cands;
    const int margin = detect_margin();

    for (size_t o = 0; o < pyr.octaves.size(); ++o) {
        const OctavePoly& polys = pyr.polys[o];
        const int w = polys.log.w, h = polys.log.h;
        std::vector<std::vector<Candidate>> rows(h);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
        for (int y = margin; y < h - margin; ++y) {
            auto& out = rows[y];
            for (int x = margin; x < w - margin; ++x) {
                const ExtremalScales es = solve_extremal_scales(polys.log, x, y);
                const ExtremumKind kinds[2] = {ExtremumKind::Max, ExtremumKind::Min};
                const std::optional<double> sig[2] = {es.sigma_max, es.sigma_min};
                for (int k = 0; k < 2; ++k) {
                    if (!sig[k]) continue;
                    const double v = polys.log.eval_at(x, y, *sig[k]);
                    if (std::abs(v) < cfg.contrast_floor) continue;
                    // a genuine interior scale extremum dominates the cubic at
                    // both ends of the ladder range; shallow fit wiggles on a
                    // monotone profile do not
                    const double lo = polys.log.eval_at(x, y, kScaleLadder[0]);
                    const double hi = polys.log.eval_at(x, y, kScaleLadder[3]);
                    if (kinds[k] == ExtremumKind::Max && (v < lo || v < hi)) continue;
                    if (kinds[k] == ExtremumKind::Min && (v > lo || v > hi)) continue;
                    const auto rc = refine_subpixel(polys, x, y, kinds[k], margin);
                    if (!rc) continue;
                    // each extremum is owned by its nearest pixel; the rest of
                    // the convergence basin yields the same point
                    if (std::lround(rc->x) != x || std::lround(rc->y) != y) continue;
                    LocalMatrices m;
                    try {
                        m = local_matrices(polys, rc->x, rc->y, rc->sigma, 0);
                    } catch (const DomainError&) {
                        continue;
                    }
                    if (extremum_test(m) != kinds[k]) continue;
                    // independent re-check of Eq. 4: a finite-difference
                    // gradient of the LoG field itself must also vanish at
                    // the refined point (the derivative stacks and the LoG
                    // cubic carry independent interpolation noise; shallow
                    // ridges produce stack-gradient zeros far from the true
                    // extremum)
                    {
                        LocalMatrices fd = m;
                        const double gfx =
                            0.5 * (polys.log.eval(rc->x + 1, rc->y, rc->sigma) -
                                   polys.log.eval(rc->x - 1, rc->y, rc->sigma));
                        const double gfy =
                            0.5 * (polys.log.eval(rc->x, rc->y + 1, rc->sigma) -
                                   polys.log.eval(rc->x, rc->y - 1, rc->sigma));
                        fd.n11 = gfx * gfx;
                        fd.n12 = gfx * gfy;
                        fd.n22 = gfy * gfy;
                        if (extremum_test(fd) != kinds[k]) continue;
                    }
                    if (!edge_response_filter(m.hxx, m.hxy, m.hyy, cfg.edge_ratio))
                        continue;
                    const double resp = polys.log.eval(rc->x, rc->y, rc->sigma);
                    if (std::abs(resp) < cfg.contrast_floor) continue;
                    // a feature is the extremum of its own scale-sized
                    // neighbourhood; ring and ridge responses have stronger
                    // points within their support and are not structure
                    // centers (the eigenvalue test alone cannot see them)
                    {
                        bool dominant = true;
                        const double rp = 0.75 * rc->sigma;
                        const double slevels[3] = {rc->sigma / 1.12, rc->sigma,
                                                   rc->sigma * 1.12};
                        for (int pd = 0; pd < 8 && dominant; ++pd) {
                            const double ang = pd * (kPi / 4.0);
                            const double px = std::clamp(rc->x + rp * std::cos(ang),
                                                         0.0, double(polys.log.w - 1));
                            const double py = std::clamp(rc->y + rp * std::sin(ang),
                                                         0.0, double(polys.log.h - 1));
                            for (double ps : slevels) {
                                const double pv = polys.log.eval(px, py, ps);
                                if (kinds[k] == ExtremumKind::Max ? pv >= resp
                                                                  : pv <= resp) {
                                    dominant = false;
                                    break;
                                }
                            }
                        }
                        if (!dominant) continue;
                    }
                    out.push_back({rc->x, rc->y, rc->sigma, resp, kinds[k],
                                   static_cast<int>(o)});
                }
            }
        }
        for (auto& r : rows) cands.insert(cands.end(), r.begin(), r.end());
    }

    // relative contrast gate against the median response of this channel
    if (!cands.empty()) {
        std::vector<double> mags(cands.size());
        for (size_t i = 0; i < cands.size(); ++i) mags[i] = std::abs(cands[i].response);
        std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
        const double median = mags[mags.size() / 2];
        const double thr = std::max(cfg.contrast_median_factor * median,
                                    cfg.contrast_floor);
        cands.erase(std::remove_if(cands.begin(), cands.end(),
                                   [&](const Candidate& c) {
                                       return std::abs(c.response) < thr;
                                   }),
                    cands.end());
    }

    std::vector<Feature> feats;
    feats.reserve(cands.size());
    const Mat2 from_M = pyr.to_frame_M.inverse();
    for (const Candidate& c : cands) {
        const double fx = octave_to_frame_coord(c.x, c.octave);
        const double fy = octave_to_frame_coord(c.y, c.octave);
        const Vec2 orig = from_M * (Vec2{fx, fy} - pyr.to_frame_t);
        Feature f;
        f.x = orig.x;
        f.y = orig.y;
        f.sigma = c.sigma * std::ldexp(1.0, c.octave);
        f.kind = c.kind;
        f.octave = c.octave;
        f.response = c.response;
        f.channel = pyr.channel;
        feats.push_back(std::move(f));
    }
    return feats;
}

std::vector<size_t> dedupe_feature_indices(const std::vector<Feature>& feats) {
    std::vector<size_t> order(feats.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double ra = std::abs(feats[a].response), rb = std::abs(feats[b].response);
        if (ra != rb) return ra > rb;
        if (feats[a].y != feats[b].y) return feats[a].y < feats[b].y;
        if (feats[a].x != feats[b].x) return feats[a].x < feats[b].x;
        if (feats[a].sigma != feats[b].sigma) return feats[a].sigma < feats[b].sigma;
        return a < b;
    });

    // uniform grid hash over positions, cell size = dedup distance
    struct Kept {
        double x, y, sigma;
    };
    std::vector<size_t> result;
    std::vector<Kept> kept;
    auto cell = [](double v) { return static_cast<long>(std::floor(v / kDedupDist)); };
    std::vector<std::pair<long long, size_t>> grid;  // (cell key, kept index)
    auto key = [&](long cx, long cy) {
        return (static_cast<long long>(cx) << 32) ^ (cy & 0xffffffffLL);
    };

    for (size_t oi : order) {
        const Feature& f = feats[oi];
        bool dup = false;
        const long cx = cell(f.x), cy = cell(f.y);
        for (long gy = cy - 1; gy <= cy + 1 && !dup; ++gy)
            for (long gx = cx - 1; gx <= cx + 1 && !dup; ++gx) {
                const long long k = key(gx, gy);
                for (const auto& [gk, ki] : grid) {
                    if (gk != k) continue;
                    const Kept& o = kept[ki];
                    const double dx = f.x - o.x, dy = f.y - o.y;
                    if (dx * dx + dy * dy > kDedupDist * kDedupDist) continue;
                    const double r = f.sigma > o.sigma ? f.sigma / o.sigma
                                                       : o.sigma / f.sigma;
                    if (r <= kDedupScaleRatio) {
                        dup = true;
                        break;
                    }
                }
            }
        if (!dup) {
            grid.emplace_back(key(cx, cy), kept.size());
            kept.push_back({f.x, f.y, f.sigma});
            result.push_back(oi);
        }
    }
    return result;
}

std::vector<size_t> sort_feature_indices(const std::vector<Feature>& feats) {
    std::vector<size_t> order(feats.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t ia, size_t ib) {
        const Feature& a = feats[ia];
        const Feature& b = feats[ib];
        if (a.octave != b.octave) return a.octave < b.octave;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        return ia < ib;
    });
    return order;
}

void dedupe_features(std::vector<Feature>& feats) {
    const std::vector<size_t> keep = dedupe_feature_indices(feats);
    std::vector<Feature> result;
    result.reserve(keep.size());
    for (size_t i : keep) result.push_back(std::move(feats[i]));
    feats = std::move(result);
}

void sort_features(std::vector<Feature>& feats) {
    const std::vector<size_t> order = sort_feature_indices(feats);
    std::vector<Feature> result;
    result.reserve(order.size());
    for (size_t i : order) result.push_back(std::move(feats[i]));
    feats = std::move(result);
}

std::vector<Feature> detect(const GrayImage& img, const DetectorConfig& cfg) {
    std::vector<AffineParams> channels = cfg.channels;
    if (channels.empty()) channels.emplace_back(Mat2::identity(), 1.0);

    std::vector<Feature> all;
    bool any_channel_ran = false;
    for (const AffineParams& ch : channels) {
        Pyramid pyr;
        if (cfg.warp_fast_path && !ch.is_identity()) {
            const auto [fw, fh] = warped_frame_dims(img, ch);
            const int n = std::min(cfg.n_octaves, max_octaves(fw, fh));
            if (n < 1) continue;  // channel frame too small, skip
            pyr = build_pyramid_warped(img, ch, n);
        } else {
            const int n = std::min(cfg.n_octaves, max_octaves(img.width(), img.height()));
            if (n < 1) throw SizeError("image too small for detection");
            pyr = build_pyramid(img, ch, n);
        }
        any_channel_ran = true;
        std::vector<Feature> feats = scan_pyramid(pyr, cfg);
        // drop anything mapped outside the original raster
        feats.erase(std::remove_if(feats.begin(), feats.end(),
                                   [&](const Feature& f) {
                                       return f.x < 0 || f.y < 0 ||
                                              f.x > img.width() - 1 ||
                                              f.y > img.height() - 1;
                                   }),
                    feats.end());
        dedupe_features(feats);  // within-channel duplicates first
        all.insert(all.end(), feats.begin(), feats.end());
    }
    if (!any_channel_ran) throw SizeError("image too small for every channel");

    dedupe_features(all);
    sort_features(all);
    return all;
}

void save_features(const std::vector<Feature>& feats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# affina features 1\n" << feats.size() << "\n";
    char line[512];
    for (const Feature& f : feats) {
        std::snprintf(line, sizeof(line),
                      "%.4f %.4f %.4f %s %d %.6e %.8f %.8f %.8f %.8f %zu",
                      f.x, f.y, f.sigma, f.kind == ExtremumKind::Max ? "max" : "min",
                      f.octave, f.response, f.channel.A.a, f.channel.A.b,
                      f.channel.A.c, f.channel.A.d, f.orientations.size());
        out << line;
        for (double th : f.orientations) {
            std::snprintf(line, sizeof(line), " %.6f", th);
            out << line;
        }
        out << "\n";
    }
}

std::vector<Feature> load_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    if (header.rfind("# affina features", 0) != 0)
        throw FormatError("not a feature file: " + path);
    size_t n = 0;
    in >> n;
    std::vector<Feature> feats(n);
    for (size_t i = 0; i < n; ++i) {
        Feature& f = feats[i];
        std::string kind;
        size_t n_ori = 0;
        Mat2 A;
        if (!(in >> f.x >> f.y >> f.sigma >> kind >> f.octave >> f.response >>
              A.a >> A.b >> A.c >> A.d >> n_ori))
            throw FormatError("truncated feature file: " + path);
        f.kind = kind == "max" ? ExtremumKind::Max : ExtremumKind::Min;
        f.channel = AffineParams{A, 1.0};
        f.orientations.resize(n_ori);
        for (size_t k = 0; k < n_ori; ++k) in >> f.orientations[k];
    }
    return feats;
}

namespace ref {

std::vector<SweepExtremum> scale_sweep_detect(const GrayImage& img, double sigma_lo,
                                              double sigma_hi, int steps,
                                              double min_abs_response) {
    const int w = img.width(), h = img.height();
    std::vector<GrayImage> stack;
    std::vector<double> sigmas;
    for (int i = 0; i < steps; ++i) {
        const double s = sigma_lo * std::pow(sigma_hi / sigma_lo,
                                             static_cast<double>(i) / (steps - 1));
        sigmas.push_back(s);
        const auto g0 = gaussian_kernel_1d(s, 0);
        const auto g2 = gaussian_kernel_1d(s, 2);
        GrayImage resp = convolve_separable(img, g2, g0);
        convolve_separable_add(img, g0, g2, resp);
        const float n = static_cast<float>(s * s);
        for (float& v : resp.data()) v *= n;
        stack.push_back(std::move(resp));
    }

    std::vector<SweepExtremum> out;
    const int margin = 5;
    for (int si = 1; si + 1 < steps; ++si) {
        for (int y = margin; y < h - margin; ++y) {
            for (int x = margin; x < w - margin; ++x) {
                const float v = stack[si].at(x, y);
                if (std::abs(v) < min_abs_response) continue;
                bool is_max = true, is_min = true;
                for (int ds = -1; ds <= 1 && (is_max || is_min); ++ds)
                    for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (ds == 0 && dy == 0 && dx == 0) continue;
                            const float nb = stack[si + ds].at(x + dx, y + dy);
                            if (nb >= v) is_max = false;
                            if (nb <= v) is_min = false;
                            if (!is_max && !is_min) break;
                        }
                if (is_max)
                    out.push_back({static_cast<double>(x), static_cast<double>(y),
                                   sigmas[si], ExtremumKind::Max, v});
                else if (is_min)
                    out.push_back({static_cast<double>(x), static_cast<double>(y),
                                   sigmas[si], ExtremumKind::Min, v});
            }
        }
    }
    return out;
}

}  // namespace ref

}  // namespace affina
