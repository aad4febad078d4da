#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sctpsteg/msd.hpp"

using namespace sctpsteg;
using namespace sctpsteg::ms;

TEST_CASE("frame layout: start sequence, parity-coded group size, length, body", "[msd]") {
    // n=3, k=2, steganogram "001101" -> groups (0,1) and (1,2).
    BitString payload;
    for (char c : std::string("001101")) payload.push_back(c == '1');
    auto frame = msd_frame(payload, 3, 2);

    std::vector<uint16_t> expect = {2, 1, 0};   // phase 1
    expect.insert(expect.end(), {0, 0, 1, 0}); // phase 2: k=2 as parities 0010
    // phase 3: length 6 as a 32-bit value under the (3,2) codebook, then body.
    GroupCodebook cb(3, 2);
    auto [len_groups, pad] = cb.encode(BitString::from_uint(6, 32));
    (void)pad;
    for (const auto& g : len_groups) expect.insert(expect.end(), g.begin(), g.end());
    expect.insert(expect.end(), {0, 1, 1, 2});

    CHECK(frame.stream_ids == expect);
    CHECK(frame.untapped_bits == 0);
}

TEST_CASE("receive decodes its own frames", "[msd]") {
    std::mt19937_64 rng(3);
    for (uint16_t n : {2, 3, 4, 5, 9}) {
        for (uint16_t k = 1; k <= 8; ++k) {
            for (int trial = 0; trial < 5; ++trial) {
                size_t len = 1 + rng() % 64;
                BitString payload = BitString::random(len, rng);
                auto frame = msd_frame(payload, n, k);
                auto got = msd_receive(frame.stream_ids, n);
                REQUIRE(got.has_value());
                INFO("n=" << n << " k=" << k << " len=" << len);
                CHECK(*got == payload);
            }
        }
    }
}

TEST_CASE("frames survive surrounding cover traffic", "[msd]") {
    std::mt19937_64 rng(5);
    BitString payload = BitString::random(40, rng);
    auto frame = msd_frame(payload, 4, 3);

    // Prepend chatter that never contains the start sequence 3,2,1,0.
    std::vector<uint16_t> wire = {0, 1, 2, 3, 3, 1, 0, 2};
    wire.insert(wire.end(), frame.stream_ids.begin(), frame.stream_ids.end());
    wire.insert(wire.end(), {1, 1, 2, 0});
    auto got = msd_receive(wire, 4);
    REQUIRE(got.has_value());
    CHECK(*got == payload);
}

TEST_CASE("no start sequence means no frame", "[msd]") {
    CHECK_FALSE(msd_receive({0, 1, 2, 0, 1, 2}, 3).has_value());
    CHECK_FALSE(msd_receive({2, 1}, 3).has_value());
    CHECK_FALSE(msd_receive({}, 2).has_value());
}

TEST_CASE("malformed frames fail loudly", "[msd]") {
    // Start sequence then a parity field spelling k=0.
    CHECK_THROWS_AS(msd_receive({2, 1, 0, 0, 0, 0, 0}, 3), MalformedFrame);
    // Truncated right after the start sequence.
    CHECK_THROWS_AS(msd_receive({2, 1, 0, 0, 0}, 3), MalformedFrame);
    // k out of range at the sender.
    CHECK_THROWS_AS(msd_frame(BitString::from_uint(1, 1), 3, 0), MalformedFrame);
}

TEST_CASE("empty steganogram is a bare length-zero frame", "[msd]") {
    auto frame = msd_frame(BitString(), 3, 1);
    auto got = msd_receive(frame.stream_ids, 3);
    REQUIRE(got.has_value());
    CHECK(got->empty());
}

TEST_CASE("send checks the per-stream carrier budget", "[msd]") {
    BitString payload = BitString::from_uint(0b1010, 4);
    auto frame = msd_frame(payload, 3, 1);
    std::vector<size_t> needed(3, 0);
    for (uint16_t sid : frame.stream_ids) needed[sid]++;

    CHECK_NOTHROW(msd_send(payload, 3, 1, needed));
    std::vector<size_t> short_of_one = needed;
    short_of_one[0]--;
    CHECK_THROWS_AS(msd_send(payload, 3, 1, short_of_one), InsufficientCarrier);
}
