#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bits.hpp"
#include "codebook.hpp"

namespace sctpsteg::ms {

struct MalformedFrame : CodebookError {
    explicit MalformedFrame(const std::string& what) : CodebookError("malformed frame: " + what) {}
};
struct InsufficientCarrier : CodebookError {
    InsufficientCarrier() : CodebookError("not enough cover traffic on some stream") {}
};

/// Three-phase framing over stream-identifier choices:
///   phase 1: start sequence, one chunk per stream, ids n-1 .. 0;
///   phase 2: four chunks whose stream-id parities spell k, MSB-first;
///   phase 3: 32-bit steganogram length, then the steganogram, both
///            group-coded with the (n, k) codebook.
struct MsdFrame {
    std::vector<uint16_t> stream_ids; // one entry per DATA chunk, in TSN order
    size_t untapped_bits = 0;         // trailing pad bits in the body's final group
};

inline MsdFrame msd_frame(const BitString& steganogram, uint16_t n, uint16_t k) {
    if (n < 2) throw CodebookError("need at least 2 streams");
    if (k < 1 || k > 15) throw MalformedFrame("group size must be in 1..15");
    GroupCodebook cb(n, k);

    MsdFrame frame;
    // Phase 1: start sequence.
    for (int sid = int(n) - 1; sid >= 0; --sid) frame.stream_ids.push_back(uint16_t(sid));
    // Phase 2: group size, 4 parity bits MSB-first. Stream 0 is the even
    // representative, stream 1 the odd one (n >= 2 guarantees both exist).
    for (int i = 3; i >= 0; --i) frame.stream_ids.push_back(uint16_t((k >> i) & 1));
    // Phase 3: length then body.
    auto flatten = [&](const std::vector<Group>& groups) {
        for (const auto& g : groups)
            for (uint16_t sid : g) frame.stream_ids.push_back(sid);
    };
    auto [len_groups, len_pad] = cb.encode(BitString::from_uint(steganogram.size(), 32));
    (void)len_pad;
    flatten(len_groups);
    if (!steganogram.empty()) {
        auto [body_groups, untapped] = cb.encode(steganogram);
        flatten(body_groups);
        frame.untapped_bits = untapped;
    }
    return frame;
}

/// Attach the frame to real carrier traffic: `pending_per_stream[s]` is the
/// number of application messages waiting on stream s. Every directive
/// consumes one of them.
inline MsdFrame msd_send(const BitString& steganogram, uint16_t n, uint16_t k,
                         const std::vector<size_t>& pending_per_stream) {
    MsdFrame frame = msd_frame(steganogram, n, k);
    std::vector<size_t> needed(n, 0);
    for (uint16_t sid : frame.stream_ids) needed[sid]++;
    if (pending_per_stream.size() < n) throw InsufficientCarrier();
    for (uint16_t s = 0; s < n; ++s)
        if (needed[s] > pending_per_stream[s]) throw InsufficientCarrier();
    return frame;
}

/// Recover the steganogram from the TSN-ordered stream-id sequence of a run's
/// DATA chunks. Returns nullopt when no start sequence is present.
inline std::optional<BitString> msd_receive(const std::vector<uint16_t>& observed, uint16_t n) {
    if (n < 2) throw CodebookError("need at least 2 streams");
    // Sliding-window search for the start sequence n-1, n-2, ..., 0.
    bool found = false;
    size_t start = 0;
    for (size_t i = 0; i + n <= observed.size(); ++i) {
        bool hit = true;
        for (uint16_t j = 0; j < n; ++j)
            if (observed[i + j] != uint16_t(n - 1 - j)) {
                hit = false;
                break;
            }
        if (hit) {
            found = true;
            start = i + n;
            break;
        }
    }
    if (!found) return std::nullopt;

    size_t pos = start;
    if (pos + 4 > observed.size()) throw MalformedFrame("truncated group-size field");
    uint16_t k = 0;
    for (int i = 0; i < 4; ++i) k = uint16_t((k << 1) | (observed[pos + size_t(i)] % 2));
    pos += 4;
    if (k == 0) throw MalformedFrame("group size 0");

    GroupCodebook cb(n, k);
    auto next_group = [&]() -> Group {
        if (pos + k > observed.size()) throw MalformedFrame("truncated group");
        Group g(observed.begin() + long(pos), observed.begin() + long(pos + k));
        pos += k;
        return g;
    };
    auto read_coded = [&](size_t nbits) -> BitString {
        BitString acc;
        while (acc.size() < nbits) acc.append(cb.code(next_group()));
        return acc.prefix(nbits);
    };

    size_t length = size_t(read_coded(32).to_uint());
    if (length == 0) return BitString();
    return read_coded(length);
}

} // namespace sctpsteg::ms
