#pragma once

#include "affina/descriptor.hpp"

namespace affina {

struct Match {
    int index_a = -1, index_b = -1;
    double distance = 0.0;  // L2 on dequantized (byte/512) vectors
    double ratio = 0.0;     // nearest / second-nearest
};

struct MatcherConfig {
    double ratio_max = 0.8;
    bool mutual_check = false;
};

// Exhaustive nearest-neighbor search with the distance-ratio test.
// Deterministic: ties break toward the lower index.
std::vector<Match> match_descriptors(const std::vector<Descriptor128>& a,
                                     const std::vector<Descriptor128>& b,
                                     const MatcherConfig& cfg);

void save_matches(const std::vector<Match>& matches, const std::string& path);
std::vector<Match> load_matches(const std::string& path);

}  // namespace affina
