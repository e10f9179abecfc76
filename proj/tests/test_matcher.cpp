#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "affina/matcher.hpp"

using namespace affina;

namespace {

std::vector<Descriptor128> random_set(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<Descriptor128> out(n);
    for (auto& d : out)
        for (auto& v : d.values) v = static_cast<uint8_t>(byte(rng));
    return out;
}

}  // namespace

TEST_CASE("self match with mutual check is the identity") {
    const auto set = random_set(40, 1);
    MatcherConfig cfg;
    cfg.ratio_max = 1.0;
    cfg.mutual_check = true;
    const auto matches = match_descriptors(set, set, cfg);
    REQUIRE(matches.size() == set.size());
    for (const Match& m : matches) {
        CHECK(m.index_a == m.index_b);
        CHECK(m.distance == doctest::Approx(0.0));
    }
}

TEST_CASE("equidistant neighbors give ratio 1.0 and fail the 0.8 gate") {
    std::vector<Descriptor128> a(1), b(2);
    a[0].values.fill(0);
    b[0].values.fill(0);
    b[1].values.fill(0);
    b[0].values[0] = 10;  // equal distance to the query
    b[1].values[1] = 10;
    MatcherConfig cfg;
    cfg.ratio_max = 1.0;
    auto matches = match_descriptors(a, b, cfg);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].ratio == doctest::Approx(1.0));
    CHECK(matches[0].index_b == 0);  // tie breaks toward the lower index

    cfg.ratio_max = 0.8;
    CHECK(match_descriptors(a, b, cfg).empty());
}

TEST_CASE("planted duplicates are recovered exactly") {
    auto b = random_set(100, 2);
    std::vector<Descriptor128> a(20);
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> jitter(-2, 2);
    for (int i = 0; i < 20; ++i) {
        a[i] = b[i * 5];
        for (auto& v : a[i].values)
            v = static_cast<uint8_t>(std::clamp(static_cast<int>(v) + jitter(rng), 0, 255));
    }
    MatcherConfig cfg;
    const auto matches = match_descriptors(a, b, cfg);
    REQUIRE(matches.size() == 20);
    for (const Match& m : matches) CHECK(m.index_b == m.index_a * 5);
}

TEST_CASE("mutual-best mode is symmetric") {
    const auto a = random_set(30, 4);
    const auto b = random_set(30, 5);
    MatcherConfig cfg;
    cfg.ratio_max = 1.0;
    cfg.mutual_check = true;
    const auto ab = match_descriptors(a, b, cfg);
    const auto ba = match_descriptors(b, a, cfg);
    std::vector<std::pair<int, int>> sa, sb;
    for (const Match& m : ab) sa.emplace_back(m.index_a, m.index_b);
    for (const Match& m : ba) sb.emplace_back(m.index_b, m.index_a);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    CHECK(sa == sb);
}

TEST_CASE("decreasing the ratio limit never adds matches") {
    const auto a = random_set(50, 6);
    const auto b = random_set(50, 7);
    MatcherConfig tight, loose;
    tight.ratio_max = 0.7;
    loose.ratio_max = 0.95;
    const auto mt = match_descriptors(a, b, tight);
    const auto ml = match_descriptors(a, b, loose);
    CHECK(mt.size() <= ml.size());
    for (const Match& m : mt) {
        bool found = false;
        for (const Match& l : ml)
            if (l.index_a == m.index_a && l.index_b == m.index_b) found = true;
        CHECK(found);
    }
}

TEST_CASE("tiny reference sets are rejected") {
    const auto a = random_set(3, 8);
    const auto b = random_set(1, 9);
    CHECK_THROWS_AS(match_descriptors(a, b, MatcherConfig{}), DomainError);
    CHECK_THROWS_AS(match_descriptors({}, a, MatcherConfig{}), DomainError);
}

TEST_CASE("match file round trip") {
    const auto a = random_set(10, 10);
    const auto b = random_set(10, 11);
    MatcherConfig cfg;
    cfg.ratio_max = 1.0;
    const auto matches = match_descriptors(a, b, cfg);
    REQUIRE(!matches.empty());
    save_matches(matches, "/tmp/affina_matches_round.txt");
    const auto back = load_matches("/tmp/affina_matches_round.txt");
    REQUIRE(back.size() == matches.size());
    for (size_t i = 0; i < matches.size(); ++i) {
        CHECK(back[i].index_a == matches[i].index_a);
        CHECK(back[i].index_b == matches[i].index_b);
        CHECK(back[i].distance == doctest::Approx(matches[i].distance).epsilon(1e-5));
    }
}
