#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bits.hpp"
#include "codebook.hpp"

namespace sctpsteg::exp {

struct EmptyCorpus : std::runtime_error {
    EmptyCorpus() : std::runtime_error("corpus has no words") {}
};

/// Chunk counts in excluded mode can be fractional; keep them exact.
struct Rational {
    int64_t num = 0;
    int64_t den = 1;

    Rational() = default;
    Rational(int64_t n, int64_t d = 1) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("zero denominator");
        if (den < 0) { num = -num; den = -den; }
        int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    Rational operator-(const Rational& o) const {
        return {num * o.den - o.num * den, den * o.den};
    }
    bool operator==(const Rational&) const = default;
    bool operator<(const Rational& o) const { return num * o.den < o.num * den; }
    bool operator<=(const Rational& o) const { return num * o.den <= o.num * den; }
    double value() const { return double(num) / double(den); }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

enum class UntappedMode { Included, Excluded };

inline const char* to_string(UntappedMode m) {
    return m == UntappedMode::Included ? "included" : "excluded";
}

inline BitString word_bits(const std::string& word) {
    BitString bits;
    for (char c : word) {
        if (c < 'A' || c > 'Z') throw std::invalid_argument("corpus words must match [A-Z]+");
        bits.append(BitString::from_uint(uint64_t(uint8_t(c)), 8));
    }
    return bits;
}

/// Chunks needed to carry `bits` over n streams with chunk groups of size k.
/// Same greedy walk as GroupCodebook::encode, done arithmetically so large
/// n^k spaces need no materialized code table.
inline Rational chunks_needed(const BitString& bits, uint16_t n, uint16_t k, UntappedMode mode) {
    if (bits.size() == 0) throw std::invalid_argument("empty steganogram");
    if (n < 2 || k < 1) throw std::invalid_argument("need n >= 2 and k >= 1");
    int f = ms::floor_log2_pow(n, k);
    ms::u128 total = 1;
    for (uint16_t i = 0; i < k; ++i) total *= n;
    bool has_long = total > (ms::u128(1) << f);

    size_t pos = 0;
    int64_t groups = 0;
    size_t untapped = 0;
    while (pos < bits.size()) {
        size_t rem = bits.size() - pos;
        if (rem >= size_t(f)) {
            size_t take = size_t(f);
            if (has_long && rem >= size_t(f) + 1) {
                uint64_t v = bits.slice(pos, size_t(f) + 1).to_uint();
                if ((ms::u128(1) << f) + v < total) take = size_t(f) + 1;
            }
            pos += take;
        } else {
            untapped = size_t(f) - rem;
            pos = bits.size();
        }
        ++groups;
    }

    Rational included(groups * int64_t(k));
    if (mode == UntappedMode::Included) return included;
    // Untapped padding converted to chunks at the S_LBB rate of f/k bits per chunk.
    return included - Rational(int64_t(untapped) * int64_t(k), f);
}

struct ExperimentConfig {
    std::vector<uint16_t> stream_counts;
    std::vector<uint16_t> group_sizes;
    std::vector<std::string> corpus;
    std::vector<UntappedMode> modes = {UntappedMode::Included, UntappedMode::Excluded};
};

struct MeasureRow {
    uint16_t n = 0;
    uint16_t k = 0;
    UntappedMode mode = UntappedMode::Included;
    double percent = 0.0; // words attaining their per-word minimum at this k
};

using MeasureTable = std::vector<MeasureRow>;

inline MeasureTable measure(const ExperimentConfig& cfg) {
    if (cfg.corpus.empty()) throw EmptyCorpus();
    MeasureTable table;
    for (uint16_t n : cfg.stream_counts) {
        for (UntappedMode mode : cfg.modes) {
            // counts[w][i] = chunks for word w at group size cfg.group_sizes[i]
            std::vector<std::vector<Rational>> counts(cfg.corpus.size());
            for (size_t w = 0; w < cfg.corpus.size(); ++w) {
                BitString bits = word_bits(cfg.corpus[w]);
                for (uint16_t k : cfg.group_sizes)
                    counts[w].push_back(chunks_needed(bits, n, k, mode));
            }
            for (size_t i = 0; i < cfg.group_sizes.size(); ++i) {
                size_t at_min = 0;
                for (size_t w = 0; w < cfg.corpus.size(); ++w) {
                    Rational best = counts[w][0];
                    for (const Rational& r : counts[w])
                        if (r < best) best = r;
                    if (counts[w][i] == best) ++at_min;
                }
                table.push_back({n, cfg.group_sizes[i], mode,
                                 100.0 * double(at_min) / double(cfg.corpus.size())});
            }
        }
    }
    return table;
}

enum class ReportFormat { Csv, GnuplotData };

inline void report(const MeasureTable& table, ReportFormat fmt, std::ostream& os) {
    if (fmt == ReportFormat::Csv) {
        os << "n,k,mode,percent\n";
        for (const auto& row : table)
            os << row.n << "," << row.k << "," << to_string(row.mode) << "," << row.percent
               << "\n";
    } else {
        os << "# n k mode percent\n";
        uint16_t prev_n = table.empty() ? 0 : table.front().n;
        for (const auto& row : table) {
            if (row.n != prev_n) {
                os << "\n"; // gnuplot dataset separator per stream count
                prev_n = row.n;
            }
            os << row.n << " " << row.k << " " << to_string(row.mode) << " " << row.percent
               << "\n";
        }
    }
}

} // namespace sctpsteg::exp
