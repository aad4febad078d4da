#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "bits.hpp"

namespace sctpsteg::ms {

struct CodebookError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooLarge : CodebookError {
    TooLarge() : CodebookError("codebook exceeds entry budget") {}
};
struct UnknownGroup : CodebookError {
    UnknownGroup() : CodebookError("group tuple not in codebook") {}
};
struct LengthOverrun : CodebookError {
    LengthOverrun() : CodebookError("declared length exceeds available code bits") {}
};

using Group = std::vector<uint16_t>; // k stream identifiers, 0-based
using u128 = unsigned __int128;

/// floor(log2(n^k)) without floating point; throws TooLarge past 2^62.
inline int floor_log2_pow(uint64_t n, uint32_t k) {
    u128 v = 1;
    for (uint32_t i = 0; i < k; ++i) {
        v *= n;
        if (v > (u128(1) << 62)) throw TooLarge();
    }
    int bits = -1;
    while (v) {
        v >>= 1;
        ++bits;
    }
    return bits;
}

/// Variable-length code assignment over all n^k stream-id tuples:
/// tuples sorted ascending lexicographically; the first 2^F get F-bit codes
/// counting up from zero (F = floor(log2(n^k))), the rest get (F+1)-bit
/// codes counting up from zero.
class GroupCodebook {
public:
    GroupCodebook(uint16_t n, uint16_t k, uint64_t max_entries = uint64_t(1) << 32)
        : n_(n), k_(k) {
        if (n < 2) throw CodebookError("need at least 2 streams");
        if (k < 1) throw CodebookError("group size must be >= 1");
        uint64_t total = 1;
        for (uint16_t i = 0; i < k; ++i) {
            total *= n;
            if (total > max_entries) throw TooLarge();
        }
        total_ = total;
        f_ = floor_log2_pow(n, k);
    }

    uint16_t streams() const { return n_; }
    uint16_t group_size() const { return k_; }
    uint64_t entries() const { return total_; }
    int min_code_bits() const { return f_; }
    int max_code_bits() const { return total_ == (uint64_t(1) << f_) ? f_ : f_ + 1; }

    /// Lexicographic rank of a tuple == its index in base-n positional notation.
    uint64_t rank(const Group& g) const {
        if (g.size() != k_) throw UnknownGroup();
        uint64_t r = 0;
        for (uint16_t sid : g) {
            if (sid >= n_) throw UnknownGroup();
            r = r * n_ + sid;
        }
        return r;
    }

    Group unrank(uint64_t r) const {
        if (r >= total_) throw UnknownGroup();
        Group g(k_);
        for (int i = int(k_) - 1; i >= 0; --i) {
            g[size_t(i)] = uint16_t(r % n_);
            r /= n_;
        }
        return g;
    }

    /// Codes are a pure function of rank, so nothing is materialized: the
    /// first 2^F ranks count up in F bits, the rest in F+1 bits.
    BitString code_at(uint64_t r) const {
        if (r >= total_) throw UnknownGroup();
        uint64_t short_codes = uint64_t(1) << f_;
        if (r < short_codes) return BitString::from_uint(r, size_t(f_));
        return BitString::from_uint(r - short_codes, size_t(f_) + 1);
    }
    BitString code(const Group& g) const { return code_at(rank(g)); }

    /// Greedy longest-match encoding. At each step the entry with the longest
    /// code that is a prefix of the remaining payload is chosen; a final
    /// remainder shorter than F bits is zero-padded up to an F-bit code.
    /// Returns (groups, count of trailing pad bits).
    std::pair<std::vector<Group>, size_t> encode(const BitString& payload) const {
        std::vector<Group> out;
        size_t pos = 0;
        size_t untapped = 0;
        while (pos < payload.size()) {
            size_t rem = payload.size() - pos;
            if (rem >= size_t(f_)) {
                // An F-bit match always exists; prefer the (F+1)-bit one.
                uint64_t long_rank = unmatched_;
                if (rem >= size_t(f_) + 1 && total_ > (uint64_t(1) << f_)) {
                    uint64_t v = payload.slice(pos, size_t(f_) + 1).to_uint();
                    uint64_t candidate = (uint64_t(1) << f_) + v;
                    if (candidate < total_) long_rank = candidate;
                }
                if (long_rank != unmatched_) {
                    out.push_back(unrank(long_rank));
                    pos += size_t(f_) + 1;
                } else {
                    uint64_t v = payload.slice(pos, size_t(f_)).to_uint();
                    out.push_back(unrank(v));
                    pos += size_t(f_);
                }
            } else {
                uint64_t v = payload.slice(pos, rem).to_uint() << (size_t(f_) - rem);
                out.push_back(unrank(v));
                untapped = size_t(f_) - rem;
                pos = payload.size();
            }
        }
        return {out, untapped};
    }

    /// Concatenates the groups' codes and truncates to `declared_len`.
    BitString decode(const std::vector<Group>& groups, size_t declared_len) const {
        BitString bits;
        for (const auto& g : groups) bits.append(code(g));
        if (declared_len > bits.size()) throw LengthOverrun();
        return bits.prefix(declared_len);
    }

private:
    static constexpr uint64_t unmatched_ = ~uint64_t(0);
    uint16_t n_;
    uint16_t k_;
    uint64_t total_ = 0;
    int f_ = 0;
};

inline GroupCodebook build_codebook(uint16_t n, uint16_t k,
                                    uint64_t max_entries = uint64_t(1) << 20) {
    return GroupCodebook(n, k, max_entries);
}

struct MsBandwidth {
    double max_bits_per_chunk;         // log2(s)
    double lower_bound_bits_per_chunk; // floor(log2(s^k)) / k
};

inline MsBandwidth ms_bandwidth(uint64_t s, uint32_t k) {
    if (s < 2 || k < 1) throw CodebookError("ms_bandwidth: s >= 2, k >= 1 required");
    return {std::log2(double(s)), double(floor_log2_pow(s, k)) / double(k)};
}

} // namespace sctpsteg::ms
