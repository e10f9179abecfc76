#include "affina/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_map>

namespace affina {

namespace fs = std::filesystem;

Sequence load_sequence(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DatasetError("not a directory: " + dir);

    Sequence seq;
    const char* exts[] = {".pgm", ".ppm", ".png"};
    for (int k = 1;; ++k) {
        std::string found;
        for (const char* e : exts) {
            const std::string p = dir + "/img" + std::to_string(k) + e;
            if (fs::exists(p)) {
                found = p;
                break;
            }
        }
        if (found.empty()) break;
        seq.images.push_back(load_image(found));
    }
    if (seq.images.size() < 2)
        throw DatasetError("sequence needs at least 2 images (img1, img2, ...): " + dir);

    seq.homographies.push_back(Mat3::identity());
    for (size_t k = 2; k <= seq.images.size(); ++k) {
        const std::string p = dir + "/H1to" + std::to_string(k) + "p";
        std::ifstream in(p);
        if (!in) throw DatasetError("missing homography file " + p);
        Mat3 H;
        for (int i = 0; i < 9; ++i)
            if (!(in >> H.m[i])) throw DatasetError("corrupt homography file " + p);
        try {
            H.inverse();
        } catch (const DomainError&) {
            throw DatasetError("singular homography in " + p);
        }
        seq.homographies.push_back(H);
    }
    return seq;
}

Ellipse feature_region(const Feature& f) {
    const double r = 3.0 * f.sigma;
    const Mat2 AAt = f.channel.A * f.channel.A.transpose();
    return {{f.x, f.y}, AAt.inverse() * (1.0 / (r * r))};
}

Ellipse map_ellipse(const Ellipse& e, const Mat2& J, const Vec2& c1) {
    const Mat2 Ji = J.inverse();
    return {c1, Ji.transpose() * e.E * Ji};
}

namespace {

// conservative bounding radius: 1/sqrt(smallest eigenvalue of E)
double bounding_radius(const Ellipse& e) {
    const auto ev = sym_eigenvalues(e.E.a, e.E.b, e.E.d);
    return ev[0] > 0.0 ? 1.0 / std::sqrt(ev[0]) : 1e9;
}

}  // namespace

double ellipse_overlap_error(const Ellipse& a, const Ellipse& b) {
    const double ra = bounding_radius(a), rb = bounding_radius(b);
    const Vec2 dc = a.c - b.c;
    if (dc.norm() > ra + rb) return 1.0;

    const double lo_x = std::min(a.c.x - ra, b.c.x - rb);
    const double hi_x = std::max(a.c.x + ra, b.c.x + rb);
    const double lo_y = std::min(a.c.y - ra, b.c.y - rb);
    const double hi_y = std::max(a.c.y + ra, b.c.y + rb);
    const double step = std::max(ra, rb) / 32.0;

    long inter = 0, uni = 0;
    const int nx = static_cast<int>((hi_x - lo_x) / step) + 1;
    const int ny = static_cast<int>((hi_y - lo_y) / step) + 1;
    for (int iy = 0; iy < ny; ++iy) {
        const double y = lo_y + (iy + 0.5) * step;
        for (int ix = 0; ix < nx; ++ix) {
            const double x = lo_x + (ix + 0.5) * step;
            const double ax = x - a.c.x, ay = y - a.c.y;
            const double bx = x - b.c.x, by = y - b.c.y;
            const bool in_a =
                a.E.a * ax * ax + 2.0 * a.E.b * ax * ay + a.E.d * ay * ay <= 1.0;
            const bool in_b =
                b.E.a * bx * bx + 2.0 * b.E.b * bx * by + b.E.d * by * by <= 1.0;
            if (in_a && in_b) ++inter;
            if (in_a || in_b) ++uni;
        }
    }
    if (uni == 0) return 1.0;
    return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

CorrespondenceResult correspondences(const std::vector<Feature>& fa,
                                     const std::vector<Feature>& fb, const Mat3& H,
                                     double overlap_max, int width_b, int height_b,
                                     int width_a, int height_a) {
    const Mat3 Hinv = H.inverse();

    // project image-1 regions into image-k; visibility = center lands inside
    std::vector<Ellipse> ea;
    std::vector<int> ia_of;  // projected index -> feature index
    for (size_t i = 0; i < fa.size(); ++i) {
        const Vec2 c = H.apply({fa[i].x, fa[i].y});
        if (c.x < 0 || c.y < 0 || c.x > width_b - 1 || c.y > height_b - 1) continue;
        ea.push_back(map_ellipse(feature_region(fa[i]), H.jacobian({fa[i].x, fa[i].y}), c));
        ia_of.push_back(static_cast<int>(i));
    }
    std::vector<Ellipse> eb;
    std::vector<int> ib_of;
    for (size_t j = 0; j < fb.size(); ++j) {
        const Vec2 back = Hinv.apply({fb[j].x, fb[j].y});
        if (back.x < 0 || back.y < 0 || back.x > width_a - 1 || back.y > height_a - 1)
            continue;
        eb.push_back(feature_region(fb[j]));
        ib_of.push_back(static_cast<int>(j));
    }

    CorrespondenceResult res;
    res.visible_a = static_cast<int>(ea.size());
    res.visible_b = static_cast<int>(eb.size());
    if (ea.empty() || eb.empty()) return res;

    // candidate pairs by center-distance prefilter over a uniform grid
    struct Cand {
        double err;
        int pa, pb;
    };
    std::vector<double> rb_radius(eb.size());
    double rb_max = 0.0;
    for (size_t j = 0; j < eb.size(); ++j) {
        rb_radius[j] = bounding_radius(eb[j]);
        rb_max = std::max(rb_max, std::min(rb_radius[j], 1e4));
    }
    const double cell = std::max(rb_max, 4.0);
    std::unordered_map<long long, std::vector<int>> grid;
    auto key = [](long cx, long cy) {
        return (static_cast<long long>(cx) << 32) ^ (cy & 0xffffffffLL);
    };
    for (size_t j = 0; j < eb.size(); ++j) {
        const long cx = static_cast<long>(std::floor(eb[j].c.x / cell));
        const long cy = static_cast<long>(std::floor(eb[j].c.y / cell));
        grid[key(cx, cy)].push_back(static_cast<int>(j));
    }

    std::vector<std::vector<Cand>> per_a(ea.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (int i = 0; i < static_cast<int>(ea.size()); ++i) {
        const double ra = bounding_radius(ea[i]);
        const int reach = static_cast<int>((ra + rb_max) / cell) + 1;
        const long cx = static_cast<long>(std::floor(ea[i].c.x / cell));
        const long cy = static_cast<long>(std::floor(ea[i].c.y / cell));
        for (long gy = cy - reach; gy <= cy + reach; ++gy)
            for (long gx = cx - reach; gx <= cx + reach; ++gx) {
                const auto it = grid.find(key(gx, gy));
                if (it == grid.end()) continue;
                for (int j : it->second) {
                    if ((ea[i].c - eb[j].c).norm() > ra + rb_radius[j]) continue;
                    const double err = ellipse_overlap_error(ea[i], eb[j]);
                    if (err < overlap_max) per_a[i].push_back({err, i, j});
                }
            }
    }
    std::vector<Cand> cands;
    for (auto& v : per_a) cands.insert(cands.end(), v.begin(), v.end());

    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.err != b.err) return a.err < b.err;
        if (a.pa != b.pa) return a.pa < b.pa;
        return a.pb < b.pb;
    });
    std::vector<char> used_a(ea.size(), 0), used_b(eb.size(), 0);
    for (const Cand& c : cands) {
        if (used_a[c.pa] || used_b[c.pb]) continue;
        used_a[c.pa] = used_b[c.pb] = 1;
        res.pairs.emplace_back(ia_of[c.pa], ib_of[c.pb]);
    }
    std::sort(res.pairs.begin(), res.pairs.end());
    return res;
}

DetectDescribeResult detect_and_describe(const GrayImage& img,
                                         const DetectorConfig& cfg) {
    std::vector<AffineParams> channels = cfg.channels;
    if (channels.empty()) channels.emplace_back(Mat2::identity(), 1.0);

    std::vector<Feature> feats;
    std::vector<std::vector<Descriptor128>> per_feature;

    for (const AffineParams& ch : channels) {
        Pyramid pyr;
        if (cfg.warp_fast_path && !ch.is_identity()) {
            const auto [fw, fh] = warped_frame_dims(img, ch);
            const int n = std::min(cfg.n_octaves, max_octaves(fw, fh));
            if (n < 1) continue;
            pyr = build_pyramid_warped(img, ch, n);
        } else {
            const int n = std::min(cfg.n_octaves, max_octaves(img.width(), img.height()));
            if (n < 1) throw SizeError("image too small for detection");
            pyr = build_pyramid(img, ch, n);
        }
        std::vector<Feature> chf = scan_pyramid(pyr, cfg);
        chf.erase(std::remove_if(chf.begin(), chf.end(),
                                 [&](const Feature& f) {
                                     return f.x < 0 || f.y < 0 ||
                                            f.x > img.width() - 1 ||
                                            f.y > img.height() - 1;
                                 }),
                  chf.end());
        dedupe_features(chf);  // collapse within-channel duplicates pre-describe
        DescribeResult dr = describe(chf, pyr);
        std::vector<std::vector<Descriptor128>> bucket(chf.size());
        for (Descriptor128& d : dr.descriptors) {
            const int fi = d.feature_index;
            bucket[fi].push_back(std::move(d));
        }
        for (size_t i = 0; i < chf.size(); ++i) {
            feats.push_back(std::move(chf[i]));
            per_feature.push_back(std::move(bucket[i]));
        }
    }

    const std::vector<size_t> keep = dedupe_feature_indices(feats);
    std::vector<Feature> kept_feats;
    std::vector<std::vector<Descriptor128>> kept_descs;
    kept_feats.reserve(keep.size());
    for (size_t i : keep) {
        kept_feats.push_back(std::move(feats[i]));
        kept_descs.push_back(std::move(per_feature[i]));
    }
    const std::vector<size_t> order = sort_feature_indices(kept_feats);

    DetectDescribeResult out;
    out.features.reserve(order.size());
    for (size_t rank = 0; rank < order.size(); ++rank) {
        const size_t i = order[rank];
        out.features.push_back(std::move(kept_feats[i]));
        for (Descriptor128& d : kept_descs[i]) {
            d.feature_index = static_cast<int>(rank);
            out.descriptors.push_back(std::move(d));
        }
    }
    return out;
}

void keep_described(DetectDescribeResult& r) {
    std::vector<int> remap(r.features.size(), -1);
    std::vector<Feature> kept;
    for (const Descriptor128& d : r.descriptors) {
        if (remap[d.feature_index] < 0) {
            remap[d.feature_index] = static_cast<int>(kept.size());
            kept.push_back(r.features[d.feature_index]);
        }
    }
    for (Descriptor128& d : r.descriptors) d.feature_index = remap[d.feature_index];
    r.features = std::move(kept);
}

EvalReport evaluate(const Sequence& seq, const EvalConfig& cfg) {
    EvalReport rep;
    DetectDescribeResult first = detect_and_describe(seq.images[0], cfg.detector);
    keep_described(first);

    for (size_t k = 1; k < seq.images.size(); ++k) {
        DetectDescribeResult cur = detect_and_describe(seq.images[k], cfg.detector);
        keep_described(cur);
        const Mat3& H = seq.homographies[k];

        const CorrespondenceResult corr = correspondences(
            first.features, cur.features, H, cfg.overlap_max, seq.images[k].width(),
            seq.images[k].height(), seq.images[0].width(), seq.images[0].height());

        const int min_vis = std::min(corr.visible_a, corr.visible_b);

        int n_matches = 0, n_correct = 0;
        if (!first.descriptors.empty() && cur.descriptors.size() >= 2) {
            const std::vector<Match> matches =
                match_descriptors(first.descriptors, cur.descriptors, cfg.matcher);
            // collapse descriptor matches to unique feature pairs, best first
            std::map<std::pair<int, int>, double> fpairs;
            for (const Match& m : matches) {
                const std::pair<int, int> key{
                    first.descriptors[m.index_a].feature_index,
                    cur.descriptors[m.index_b].feature_index};
                auto it = fpairs.find(key);
                if (it == fpairs.end() || m.distance < it->second)
                    fpairs[key] = m.distance;
            }
            n_matches = static_cast<int>(fpairs.size());
            std::vector<std::pair<int, int>> corr_set(corr.pairs);
            for (const auto& [key, dist] : fpairs)
                if (std::binary_search(corr_set.begin(), corr_set.end(), key))
                    ++n_correct;

            if (!cfg.dump_dir.empty()) {
                const GrayImage vis = draw_matches(seq.images[0], seq.images[k],
                                                   first.descriptors, cur.descriptors,
                                                   matches);
                save_pgm(vis, cfg.dump_dir + "/matches_1_" + std::to_string(k + 1) +
                                  ".pgm");
            }
        }

        PairMetrics pm;
        pm.pair = "1-" + std::to_string(k + 1);
        pm.n_correspondences = static_cast<int>(corr.pairs.size());
        pm.repeatability =
            min_vis > 0 ? static_cast<double>(pm.n_correspondences) / min_vis : 0.0;
        pm.matching_score = min_vis > 0 ? static_cast<double>(n_correct) / min_vis : 0.0;
        pm.n_matches = n_matches;
        rep.rows.push_back(std::move(pm));
    }
    return rep;
}

void emit_report(const EvalReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "pair,repeatability,n_corr,matching_score,n_matches\n";
    char buf[160];
    for (const PairMetrics& r : rep.rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.6f,%d,%.6f,%d\n", r.pair.c_str(),
                      r.repeatability, r.n_correspondences, r.matching_score,
                      r.n_matches);
        out << buf;
    }
}

GrayImage draw_matches(const GrayImage& a, const GrayImage& b,
                       const std::vector<Descriptor128>& da,
                       const std::vector<Descriptor128>& db,
                       const std::vector<Match>& matches) {
    const int h = std::max(a.height(), b.height());
    const int w = a.width() + b.width();
    GrayImage out(w, h, 0.0f);
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) out.at(x, y) = a.at(x, y);
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x) out.at(a.width() + x, y) = b.at(x, y);

    auto draw_line = [&](double x0, double y0, double x1, double y1) {
        const int steps = static_cast<int>(std::hypot(x1 - x0, y1 - y0)) + 1;
        for (int s = 0; s <= steps; ++s) {
            const double t = static_cast<double>(s) / steps;
            const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
            const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
            if (x >= 0 && y >= 0 && x < w && y < h) out.at(x, y) = 1.0f;
        }
    };
    for (const Match& m : matches)
        draw_line(da[m.index_a].x, da[m.index_a].y, a.width() + db[m.index_b].x,
                  db[m.index_b].y);
    return out;
}

}  // namespace affina
