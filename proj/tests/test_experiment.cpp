#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "sctpsteg/experiment.hpp"

using namespace sctpsteg;
using namespace sctpsteg::exp;

TEST_CASE("rationals normalize and compare", "[experiment]") {
    CHECK(Rational(4, 2) == Rational(2));
    CHECK(Rational(10, 4) == Rational(5, 2));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK((Rational(12) - Rational(2)) == Rational(10));
    CHECK(Rational(-4, -2) == Rational(2));
    CHECK(Rational(7, 2).str() == "7/2");
    CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("letters encode as their 8-bit character codes", "[experiment]") {
    auto bits = word_bits("DOG");
    REQUIRE(bits.size() == 24);
    CHECK(bits.slice(0, 8).to_uint() == 'D');
    CHECK(bits.slice(8, 8).to_uint() == 'O');
    CHECK(bits.slice(16, 8).to_uint() == 'G');
    CHECK_THROWS(word_bits("dog"));
}

TEST_CASE("20-bit steganogram over 4 streams in groups of 4", "[experiment]") {
    BitString bits = BitString::from_uint(0xBEEF5 & 0xFFFFF, 20);
    // Three 8-bit groups of 4 chunks each, the last padded by 4 bits.
    CHECK(chunks_needed(bits, 4, 4, UntappedMode::Included) == Rational(12));
    // 4 pad bits at 2 steganogram bits per chunk: 2 chunks come off.
    CHECK(chunks_needed(bits, 4, 4, UntappedMode::Excluded) == Rational(10));
}

TEST_CASE("power-of-two stream counts: excluded cost never depends on k", "[experiment]") {
    std::mt19937_64 rng(23);
    for (uint16_t n : {2, 4, 8}) {
        for (int trial = 0; trial < 30; ++trial) {
            size_t letters = 2 + rng() % 14;
            std::string word;
            for (size_t i = 0; i < letters; ++i) word.push_back(char('A' + rng() % 26));
            BitString bits = word_bits(word);
            Rational first = chunks_needed(bits, n, 1, UntappedMode::Excluded);
            for (uint16_t k = 2; k <= 10; ++k)
                CHECK(chunks_needed(bits, n, k, UntappedMode::Excluded) == first);
        }
    }
}

TEST_CASE("excluded never exceeds included, and both respect the entropy floor", "[experiment]") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 40; ++trial) {
        std::string word;
        size_t letters = 2 + rng() % 8;
        for (size_t i = 0; i < letters; ++i) word.push_back(char('A' + rng() % 26));
        BitString bits = word_bits(word);
        uint16_t n = uint16_t(2 + rng() % 10);
        uint16_t k = uint16_t(1 + rng() % 6);
        Rational inc = chunks_needed(bits, n, k, UntappedMode::Included);
        Rational exc = chunks_needed(bits, n, k, UntappedMode::Excluded);
        CHECK(exc <= inc);
        // floor: word_bits / log2(n) chunks at best
        double floor_chunks = double(bits.size()) / std::log2(double(n));
        CHECK(exc.value() >= floor_chunks - 1e-9);
    }
}

TEST_CASE("greedy group counts match a DP minimum over small words", "[experiment]") {
    // Exhaustive minimum-groups oracle: dp[i] = fewest groups covering bits
    // 0..i-1, stepping by any usable code length at each point.
    auto dp_min_groups = [](const BitString& bits, uint16_t n, uint16_t k) {
        ms::GroupCodebook cb(n, k);
        size_t f = size_t(cb.min_code_bits());
        size_t fmax = size_t(cb.max_code_bits());
        bool has_long = fmax > f;
        uint64_t total = cb.entries();
        const size_t INF = size_t(-1);
        std::vector<size_t> dp(bits.size() + 1, INF);
        dp[0] = 0;
        for (size_t i = 0; i < bits.size(); ++i) {
            if (dp[i] == INF) continue;
            // short code consumes f bits (or pads out a shorter tail)
            size_t j = std::min(bits.size(), i + f);
            if (dp[i] + 1 < dp[j] || dp[j] == INF) dp[j] = std::min(dp[j], dp[i] + 1);
            if (has_long && i + f + 1 <= bits.size()) {
                uint64_t v = bits.slice(i, f + 1).to_uint();
                if ((uint64_t(1) << f) + v < total)
                    dp[i + f + 1] = std::min(dp[i + f + 1], dp[i] + 1);
            }
        }
        return dp[bits.size()];
    };

    std::mt19937_64 rng(37);
    for (uint16_t n = 2; n <= 5; ++n) {
        for (uint16_t k = 1; k <= 3; ++k) {
            for (int trial = 0; trial < 25; ++trial) {
                size_t len = 1 + rng() % 24;
                BitString bits = BitString::random(len, rng);
                Rational greedy = chunks_needed(bits, n, k, UntappedMode::Included);
                size_t optimal = dp_min_groups(bits, n, k);
                CHECK(greedy == Rational(int64_t(optimal) * int64_t(k)));
            }
        }
    }
}

TEST_CASE("measure scores the share of words at their per-word minimum", "[experiment]") {
    ExperimentConfig cfg;
    cfg.stream_counts = {3};
    cfg.group_sizes = {1, 2, 3};
    cfg.corpus = {"DOG", "ELECTRICITY", "SUMMER"};
    auto table = measure(cfg);
    REQUIRE(table.size() == 2 * 3);
    for (const auto& row : table) {
        CHECK(row.percent >= 0.0);
        CHECK(row.percent <= 100.0);
    }
    // Every word attains its minimum at some k, so the columns jointly cover
    // the corpus.
    for (UntappedMode mode : {UntappedMode::Included, UntappedMode::Excluded}) {
        double sum = 0;
        for (const auto& row : table)
            if (row.mode == mode) sum += row.percent;
        CHECK(sum >= 100.0);
    }
}

TEST_CASE("a single-word corpus puts exactly the minimizing sizes at 100", "[experiment]") {
    ExperimentConfig cfg;
    cfg.stream_counts = {3};
    cfg.group_sizes = {1, 2, 3, 4};
    cfg.corpus = {"CAT"};
    cfg.modes = {UntappedMode::Included};
    auto table = measure(cfg);
    BitString bits = word_bits("CAT");
    Rational best = chunks_needed(bits, 3, 1, UntappedMode::Included);
    for (uint16_t k : {2, 3, 4}) {
        Rational r = chunks_needed(bits, 3, k, UntappedMode::Included);
        if (r < best) best = r;
    }
    for (const auto& row : table) {
        bool is_min = chunks_needed(bits, 3, row.k, UntappedMode::Included) == best;
        CHECK(row.percent == (is_min ? 100.0 : 0.0));
    }
}

TEST_CASE("two-stream excluded mode ties every group size at 100", "[experiment]") {
    ExperimentConfig cfg;
    cfg.stream_counts = {2};
    cfg.group_sizes = {1, 2, 3, 4, 5};
    cfg.corpus = {"APPLE", "BERRY", "CHERRY"};
    cfg.modes = {UntappedMode::Excluded};
    for (const auto& row : measure(cfg)) CHECK(row.percent == 100.0);
}

TEST_CASE("empty corpus is an error", "[experiment]") {
    ExperimentConfig cfg;
    cfg.stream_counts = {2};
    cfg.group_sizes = {1};
    CHECK_THROWS_AS(measure(cfg), EmptyCorpus);
}

TEST_CASE("csv report has the documented header and one row per cell", "[experiment]") {
    ExperimentConfig cfg;
    cfg.stream_counts = {2, 3};
    cfg.group_sizes = {1, 2};
    cfg.corpus = {"HI", "NO"};
    auto table = measure(cfg);
    std::ostringstream os;
    report(table, ReportFormat::Csv, os);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "n,k,mode,percent");
    size_t rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == table.size());
}
