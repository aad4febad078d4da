#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sctpsteg/codebook.hpp"

using namespace sctpsteg;
using namespace sctpsteg::ms;

TEST_CASE("three streams, single-chunk groups: codes 0, 1, 00", "[codebook]") {
    GroupCodebook cb(3, 1);
    REQUIRE(cb.entries() == 3);
    CHECK(cb.min_code_bits() == 1);
    CHECK(cb.max_code_bits() == 2);
    CHECK(cb.code({0}).to_string() == "0");
    CHECK(cb.code({1}).to_string() == "1");
    CHECK(cb.code({2}).to_string() == "00");
}

TEST_CASE("three streams, pairs: 001101 travels as (0,1) then (1,2)", "[codebook]") {
    GroupCodebook cb(3, 2);
    REQUIRE(cb.entries() == 9);
    CHECK(cb.min_code_bits() == 3);
    CHECK(cb.max_code_bits() == 4);
    // Ranks 0..7 take the 3-bit codes, the last tuple the lone 4-bit one.
    CHECK(cb.code({0, 0}).to_string() == "000");
    CHECK(cb.code({2, 1}).to_string() == "111");
    CHECK(cb.code({2, 2}).to_string() == "0000");

    BitString payload;
    for (char c : std::string("001101")) payload.push_back(c == '1');
    auto [groups, untapped] = cb.encode(payload);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0] == Group({0, 1}));
    CHECK(groups[1] == Group({1, 2}));
    CHECK(untapped == 0);
    CHECK(cb.decode(groups, 6) == payload);
}

TEST_CASE("rank and unrank are inverse over the whole space", "[codebook]") {
    GroupCodebook cb(5, 3);
    for (uint64_t r = 0; r < cb.entries(); ++r) CHECK(cb.rank(cb.unrank(r)) == r);
    CHECK_THROWS_AS(cb.unrank(cb.entries()), UnknownGroup);
    CHECK_THROWS_AS(cb.rank({0, 0, 5}), UnknownGroup);
}

TEST_CASE("greedy encode prefers the longer code when it exists", "[codebook]") {
    GroupCodebook cb(3, 1); // codes 0, 1, 00
    BitString zeros = BitString::from_uint(0, 2);
    auto [groups, untapped] = cb.encode(zeros);
    // "00" matches the rank-2 long code in one group.
    REQUIRE(groups.size() == 1);
    CHECK(groups[0] == Group({2}));
    CHECK(untapped == 0);

    BitString zero_one = BitString::from_uint(1, 2); // "01"
    auto [g2, u2] = cb.encode(zero_one);
    REQUIRE(g2.size() == 2);
    CHECK(g2[0] == Group({0}));
    CHECK(g2[1] == Group({1}));
    CHECK(u2 == 0);
}

TEST_CASE("tail shorter than F bits is zero-padded into a short code", "[codebook]") {
    GroupCodebook cb(3, 2); // F = 3
    BitString payload = BitString::from_uint(0b1, 1);
    auto [groups, untapped] = cb.encode(payload);
    REQUIRE(groups.size() == 1);
    CHECK(cb.code(groups[0]).to_string() == "100");
    CHECK(untapped == 2);
    CHECK(cb.decode(groups, 1) == payload);
}

TEST_CASE("encode/decode round-trips random payloads", "[codebook]") {
    std::mt19937_64 rng(11);
    for (uint16_t n : {2, 3, 4, 5, 9}) {
        for (uint16_t k : {1, 2, 3}) {
            GroupCodebook cb(n, k);
            for (int trial = 0; trial < 50; ++trial) {
                size_t len = 1 + rng() % 96;
                BitString payload = BitString::random(len, rng);
                auto [groups, untapped] = cb.encode(payload);
                (void)untapped;
                CHECK(cb.decode(groups, len) == payload);
            }
        }
    }
}

TEST_CASE("decode refuses a declared length beyond the carried bits", "[codebook]") {
    GroupCodebook cb(4, 1);
    auto [groups, untapped] = cb.encode(BitString::from_uint(0b10, 2));
    (void)untapped;
    CHECK_THROWS_AS(cb.decode(groups, 100), LengthOverrun);
}

TEST_CASE("floor_log2_pow matches known values and overflows loudly", "[codebook]") {
    CHECK(floor_log2_pow(2, 10) == 10);
    CHECK(floor_log2_pow(3, 1) == 1);
    CHECK(floor_log2_pow(3, 2) == 3);
    CHECK(floor_log2_pow(9, 5) == 15);
    CHECK(floor_log2_pow(15, 10) == 39);
    CHECK_THROWS_AS(floor_log2_pow(2, 64), TooLarge);
}

TEST_CASE("bandwidth bounds for the published multi-streaming figures", "[codebook]") {
    auto b1 = ms_bandwidth(3, 1);
    CHECK(b1.lower_bound_bits_per_chunk == 1.0);
    auto b2 = ms_bandwidth(3, 2);
    CHECK(b2.lower_bound_bits_per_chunk == 1.5);
    CHECK(ms_bandwidth(4, 1).max_bits_per_chunk == 2.0);
}

TEST_CASE("materialization is capped", "[codebook]") {
    CHECK_THROWS_AS(GroupCodebook(10, 10, uint64_t(1) << 20), TooLarge);
}
