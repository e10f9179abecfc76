#pragma once

#include <string>
#include <vector>

#include "affina/matcher.hpp"

namespace affina {

// Oxford-layout sequence: img1..imgN plus H1to2p..H1toNp homography files
// (3x3 ASCII, row major) mapping image-1 coordinates to image-k.
struct Sequence {
    std::vector<GrayImage> images;
    std::vector<Mat3> homographies;  // homographies[k] maps img1 -> img(k+1); [0] = I
};

Sequence load_sequence(const std::string& dir);

// (p - c)^T E (p - c) <= 1
struct Ellipse {
    Vec2 c;
    Mat2 E;
};

// Feature measurement region: disk of radius 3 sigma mapped through the
// channel transform.
Ellipse feature_region(const Feature& f);

// Affine image of an ellipse under p -> J (p - c0) + c1.
Ellipse map_ellipse(const Ellipse& e, const Mat2& J, const Vec2& c1);

// 1 - area(intersection) / area(union), by deterministic grid sampling.
double ellipse_overlap_error(const Ellipse& a, const Ellipse& b);

struct CorrespondenceResult {
    std::vector<std::pair<int, int>> pairs;  // one-to-one, greedy lowest error
    int visible_a = 0, visible_b = 0;        // features landing in both frames
};

// Projects image-1 regions through H (affine linearization at the center)
// and pairs features whose regions overlap with error < overlap_max.
CorrespondenceResult correspondences(const std::vector<Feature>& fa,
                                     const std::vector<Feature>& fb, const Mat3& H,
                                     double overlap_max, int width_b, int height_b,
                                     int width_a, int height_a);

struct PairMetrics {
    std::string pair;  // "1-2", "1-3", ...
    double repeatability = 0.0;
    int n_correspondences = 0;
    double matching_score = 0.0;
    int n_matches = 0;
};

struct EvalReport {
    std::vector<PairMetrics> rows;
};

struct EvalConfig {
    DetectorConfig detector;
    MatcherConfig matcher;
    double overlap_max = 0.4;
    std::string dump_dir;  // when set, side-by-side match visualizations
};

// Shares each channel pyramid between detection and description.
struct DetectDescribeResult {
    std::vector<Feature> features;
    std::vector<Descriptor128> descriptors;  // ordered by feature
};
DetectDescribeResult detect_and_describe(const GrayImage& img,
                                         const DetectorConfig& cfg);

// Drops features without descriptors and remaps descriptor back-references;
// the evaluation protocol counts only features that can participate in
// matching.
void keep_described(DetectDescribeResult& r);

EvalReport evaluate(const Sequence& seq, const EvalConfig& cfg);

// CSV: pair,repeatability,n_corr,matching_score,n_matches (6 decimals).
void emit_report(const EvalReport& rep, const std::string& path);

// Debug visualization: images side by side, match lines drawn in white.
GrayImage draw_matches(const GrayImage& a, const GrayImage& b,
                       const std::vector<Descriptor128>& da,
                       const std::vector<Descriptor128>& db,
                       const std::vector<Match>& matches);

}  // namespace affina
