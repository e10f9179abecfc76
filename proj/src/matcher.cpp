#include "affina/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace affina {

namespace {

constexpr double kDequant = 1.0 / 512.0;

// Squared L2 between byte vectors (integer arithmetic, dequantized at the end).
long sq_dist(const std::array<uint8_t, 128>& a, const std::array<uint8_t, 128>& b) {
    long acc = 0;
    for (int k = 0; k < 128; ++k) {
        const int d = static_cast<int>(a[k]) - static_cast<int>(b[k]);
        acc += static_cast<long>(d) * d;
    }
    return acc;
}

struct Nearest {
    int best = -1;
    long d1 = 0, d2 = 0;  // squared byte distances
};

Nearest find_nearest(const Descriptor128& q, const std::vector<Descriptor128>& refs) {
    Nearest n;
    long d1 = std::numeric_limits<long>::max(), d2 = d1;
    int best = -1;
    for (size_t j = 0; j < refs.size(); ++j) {
        const long d = sq_dist(q.values, refs[j].values);
        if (d < d1) {
            d2 = d1;
            d1 = d;
            best = static_cast<int>(j);
        } else if (d < d2) {
            d2 = d;
        }
    }
    n.best = best;
    n.d1 = d1;
    n.d2 = d2;
    return n;
}

}  // namespace

std::vector<Match> match_descriptors(const std::vector<Descriptor128>& a,
                                     const std::vector<Descriptor128>& b,
                                     const MatcherConfig& cfg) {
    if (a.empty() || b.empty()) throw DomainError("empty descriptor set");
    if (b.size() < 2) throw DomainError("reference set needs at least 2 descriptors");

    std::vector<Nearest> nearest(a.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (int i = 0; i < static_cast<int>(a.size()); ++i)
        nearest[i] = find_nearest(a[i], b);

    std::vector<int> best_for_b;
    if (cfg.mutual_check) {
        best_for_b.assign(b.size(), -1);
        std::vector<long> best_d(b.size(), std::numeric_limits<long>::max());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
        for (int j = 0; j < static_cast<int>(b.size()); ++j) {
            long d1 = std::numeric_limits<long>::max();
            int best = -1;
            for (size_t i = 0; i < a.size(); ++i) {
                const long d = sq_dist(b[j].values, a[i].values);
                if (d < d1) {
                    d1 = d;
                    best = static_cast<int>(i);
                }
            }
            best_for_b[j] = best;
            best_d[j] = d1;
        }
    }

    std::vector<Match> out;
    for (size_t i = 0; i < a.size(); ++i) {
        const Nearest& n = nearest[i];
        if (n.best < 0) continue;
        const double d1 = std::sqrt(static_cast<double>(n.d1)) * kDequant;
        const double d2 = std::sqrt(static_cast<double>(n.d2)) * kDequant;
        const double ratio = d2 > 0.0 ? d1 / d2 : (d1 > 0.0 ? 1.0 : 0.0);
        if (ratio > cfg.ratio_max) continue;
        if (cfg.mutual_check && best_for_b[n.best] != static_cast<int>(i)) continue;
        out.push_back({static_cast<int>(i), n.best, d1, ratio});
    }
    return out;
}

void save_matches(const std::vector<Match>& matches, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    char buf[128];
    for (const Match& m : matches) {
        std::snprintf(buf, sizeof(buf), "%d %d %.6f %.6f\n", m.index_a, m.index_b,
                      m.distance, m.ratio);
        out << buf;
    }
}

std::vector<Match> load_matches(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Match> out;
    Match m;
    while (in >> m.index_a >> m.index_b >> m.distance >> m.ratio) out.push_back(m);
    return out;
}

}  // namespace affina
