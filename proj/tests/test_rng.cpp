#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "lossprobe/rng.hpp"

using namespace lossprobe;

TEST_CASE("same seed reproduces the stream") {
    Xoshiro256pp a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
    Xoshiro256pp a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next() == b.next();
    REQUIRE(same == 0);
}

TEST_CASE("stream derivation is deterministic and stream-sensitive") {
    Xoshiro256pp a = Xoshiro256pp::for_stream(7, 0);
    Xoshiro256pp b = Xoshiro256pp::for_stream(7, 0);
    Xoshiro256pp c = Xoshiro256pp::for_stream(7, 1);
    Xoshiro256pp d = Xoshiro256pp::for_stream(8, 0);
    REQUIRE(a.next() == b.next());
    REQUIRE(a.next() != c.next());
    REQUIRE(a.next() != d.next());
}

TEST_CASE("uniform01 stays in [0, 1) and covers the range") {
    Xoshiro256pp rng(3);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    REQUIRE(lo < 0.001);
    REQUIRE(hi > 0.999);
}

TEST_CASE("uniform maps into the requested interval") {
    Xoshiro256pp rng(4);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.uniform(-10.0, 10.0);
        REQUIRE(v >= -10.0);
        REQUIRE(v < 10.0);
    }
}

TEST_CASE("below returns values under the bound without bias artifacts") {
    Xoshiro256pp rng(5);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 30000; ++i) {
        const std::uint64_t v = rng.below(3);
        REQUIRE(v < 3);
        ++counts[static_cast<std::size_t>(v)];
    }
    for (int c : counts) REQUIRE(std::abs(c - 10000) < 500);  // ~5 sigma
}

TEST_CASE("sample_indices draws k distinct members deterministically") {
    Xoshiro256pp a(6), b(6);
    const auto s1 = sample_indices(100, 10, a);
    const auto s2 = sample_indices(100, 10, b);
    REQUIRE(s1 == s2);
    REQUIRE(s1.size() == 10);
    const std::set<std::size_t> uniq(s1.begin(), s1.end());
    REQUIRE(uniq.size() == 10);
    for (std::size_t i : s1) REQUIRE(i < 100);
}

TEST_CASE("sample_indices with k = n is a permutation") {
    Xoshiro256pp rng(7);
    auto s = sample_indices(20, 20, rng);
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < 20; ++i) REQUIRE(s[i] == i);
}

TEST_CASE("sample_indices rejects oversized requests") {
    Xoshiro256pp rng(8);
    REQUIRE_THROWS_AS(sample_indices(5, 6, rng), std::invalid_argument);
}

TEST_CASE("fnv1a64 matches the published vectors") {
    REQUIRE(fnv1a64("", 0) == 0xcbf29ce484222325ull);
    REQUIRE(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
    REQUIRE(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}
