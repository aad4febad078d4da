#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bits.hpp"
#include "wire.hpp"

namespace sctpsteg::packing {

struct PackingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientCarrier : PackingError {
    InsufficientCarrier() : PackingError("pending chunk queue too short for plan") {}
};
struct CountOverflow : PackingError {
    CountOverflow() : PackingError("packet exceeds max chunk count") {}
};
struct NothingToPermute : PackingError {
    NothingToPermute() : PackingError("fewer than 2 reorderable chunks") {}
};

// ---------------------------------------------------------------------------
// Chunk-count channel

struct PackingConfig {
    size_t mtu_data = 1400; // MTU minus SCTP + lower-layer headers
    size_t chunk_size = 200;
    bool honor_constraints = true;

    size_t max_chunks() const {
        size_t m = mtu_data / chunk_size;
        if (m < 1) throw PackingError("chunk size exceeds data MTU");
        return m;
    }
    /// Whole bits usable per packet with (count - 1) coding.
    int bits_per_packet() const { return int(std::floor(std::log2(double(max_chunks())))); }
    /// Theoretical rate log2(floor(mtu_data / r)).
    double theoretical_bits_per_packet() const { return std::log2(double(max_chunks())); }
};

/// Chunk counts per packet: each packet carries c chunks where (c - 1) read
/// as a B-bit value is the next B payload bits. A short final fragment is
/// zero-padded on the right.
struct CcPlan {
    std::vector<size_t> chunk_counts;
    size_t bits_consumed = 0;
};

inline CcPlan cc_embed(const PackingConfig& cfg, size_t pending_chunks, const BitString& payload) {
    if (payload.empty()) throw PackingError("empty payload");
    int b = cfg.bits_per_packet();
    if (b < 1) throw PackingError("max chunk count of 1 carries no bits");
    CcPlan plan;
    size_t pos = 0;
    size_t used = 0;
    while (pos < payload.size()) {
        size_t take = std::min(size_t(b), payload.size() - pos);
        uint64_t v = payload.slice(pos, take).to_uint() << (size_t(b) - take);
        size_t count = size_t(v) + 1;
        used += count;
        if (used > pending_chunks) throw InsufficientCarrier();
        plan.chunk_counts.push_back(count);
        pos += take;
    }
    plan.bits_consumed = payload.size();
    return plan;
}

inline BitString cc_extract(const PackingConfig& cfg, const std::vector<wire::SctpPacket>& packets) {
    int b = cfg.bits_per_packet();
    BitString out;
    for (const auto& pkt : packets) {
        if (pkt.chunks.size() > cfg.max_chunks() || pkt.chunks.empty()) throw CountOverflow();
        out.append(BitString::from_uint(uint64_t(pkt.chunks.size() - 1), size_t(b)));
    }
    return out;
}

inline BitString cc_extract_counts(const PackingConfig& cfg, const std::vector<size_t>& counts) {
    int b = cfg.bits_per_packet();
    BitString out;
    for (size_t c : counts) {
        if (c > cfg.max_chunks() || c == 0) throw CountOverflow();
        out.append(BitString::from_uint(uint64_t(c - 1), size_t(b)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chunk-order channel

namespace detail {

inline uint64_t factorial(size_t m) {
    uint64_t f = 1;
    for (size_t i = 2; i <= m; ++i) f *= i;
    return f;
}

/// Lehmer unrank: the `rank`-th permutation (lexicographic) of 0..m-1.
inline std::vector<size_t> unrank_permutation(uint64_t rank, size_t m) {
    std::vector<size_t> pool(m);
    for (size_t i = 0; i < m; ++i) pool[i] = i;
    std::vector<size_t> perm;
    perm.reserve(m);
    for (size_t i = m; i > 0; --i) {
        uint64_t f = factorial(i - 1);
        size_t idx = size_t(rank / f);
        rank %= f;
        perm.push_back(pool[idx]);
        pool.erase(pool.begin() + long(idx));
    }
    return perm;
}

inline uint64_t rank_permutation(const std::vector<size_t>& perm) {
    size_t m = perm.size();
    uint64_t rank = 0;
    std::vector<size_t> pool(m);
    for (size_t i = 0; i < m; ++i) pool[i] = i;
    for (size_t i = 0; i < m; ++i) {
        auto it = std::find(pool.begin(), pool.end(), perm[i]);
        rank += uint64_t(it - pool.begin()) * factorial(m - 1 - i);
        pool.erase(it);
    }
    return rank;
}

/// Indices of the reorderable chunks and their canonical order. Canonical
/// reference order sorts by (chunk type, serialized bytes).
inline std::vector<size_t> reorderable(const wire::SctpPacket& pkt, bool honor_constraints) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < pkt.chunks.size(); ++i)
        if (!honor_constraints || pkt.chunks[i].type != wire::CT_DATA) idx.push_back(i);
    return idx;
}

inline std::vector<uint8_t> chunk_key(const wire::Chunk& c) {
    wire::SctpPacket tmp;
    tmp.chunks.push_back(c);
    auto bytes = wire::encode_packet(tmp);
    return {bytes.begin() + 12, bytes.end()};
}

} // namespace detail

/// Bits conveyable by permuting the packet's reorderable chunks.
inline int co_capacity_bits(size_t reorderable_count) {
    if (reorderable_count < 2) return 0;
    return int(std::floor(std::log2(double(detail::factorial(reorderable_count)))));
}

/// Permutes the reorderable chunks so the permutation's lexicographic rank
/// over canonical order encodes the next floor(log2(m!)) payload bits. With
/// constraints honored, control chunks keep their slots ahead of DATA and
/// DATA keeps ascending TSN.
inline std::pair<wire::SctpPacket, size_t> co_embed(const wire::SctpPacket& in,
                                                    const BitString& payload,
                                                    bool honor_constraints = true) {
    auto slots = detail::reorderable(in, honor_constraints);
    size_t m = slots.size();
    if (m < 2) throw NothingToPermute();
    if (m > 20) throw PackingError("too many reorderable chunks to rank");
    int b = co_capacity_bits(m);

    // Canonical order of the reorderable chunks.
    std::vector<size_t> canon(m);
    for (size_t i = 0; i < m; ++i) canon[i] = i;
    std::vector<std::vector<uint8_t>> keys(m);
    for (size_t i = 0; i < m; ++i) keys[i] = detail::chunk_key(in.chunks[slots[i]]);
    std::sort(canon.begin(), canon.end(), [&](size_t a, size_t bb) {
        const auto& ka = keys[a];
        const auto& kb = keys[bb];
        if (in.chunks[slots[a]].type != in.chunks[slots[bb]].type)
            return in.chunks[slots[a]].type < in.chunks[slots[bb]].type;
        return ka < kb;
    });

    size_t take = std::min(size_t(b), payload.size());
    uint64_t rank = payload.prefix(take).to_uint() << (size_t(b) - take);
    auto perm = detail::unrank_permutation(rank, m);

    wire::SctpPacket out = in;
    for (size_t i = 0; i < m; ++i) out.chunks[slots[i]] = in.chunks[slots[canon[perm[i]]]];
    return {out, take};
}

inline BitString co_extract(const wire::SctpPacket& in, bool honor_constraints = true) {
    auto slots = detail::reorderable(in, honor_constraints);
    size_t m = slots.size();
    if (m < 2) throw NothingToPermute();
    int b = co_capacity_bits(m);

    std::vector<std::vector<uint8_t>> keys(m);
    for (size_t i = 0; i < m; ++i) keys[i] = detail::chunk_key(in.chunks[slots[i]]);
    std::vector<size_t> canon(m);
    for (size_t i = 0; i < m; ++i) canon[i] = i;
    std::sort(canon.begin(), canon.end(), [&](size_t a, size_t bb) {
        if (in.chunks[slots[a]].type != in.chunks[slots[bb]].type)
            return in.chunks[slots[a]].type < in.chunks[slots[bb]].type;
        return keys[a] < keys[bb];
    });
    // canon_pos[original slot index] = its canonical rank
    std::vector<size_t> canon_pos(m);
    for (size_t i = 0; i < m; ++i) canon_pos[canon[i]] = i;
    std::vector<size_t> perm(m);
    for (size_t i = 0; i < m; ++i) perm[i] = canon_pos[i];

    uint64_t rank = detail::rank_permutation(perm);
    uint64_t mask = (b >= 64) ? ~uint64_t(0) : ((uint64_t(1) << b) - 1);
    return BitString::from_uint(rank & mask, size_t(b));
}

} // namespace sctpsteg::packing
