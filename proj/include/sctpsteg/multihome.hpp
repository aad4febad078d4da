#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bits.hpp"

namespace sctpsteg::mh {

using Address = std::vector<uint8_t>;

struct MultihomeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoAlternatePath : MultihomeError {
    NoAlternatePath() : MultihomeError("no alternate path available") {}
};
struct UnknownAddress : MultihomeError {
    UnknownAddress() : MultihomeError("address not in path code") {}
};

/// Bit assignment over alternate addresses: addresses sorted ascending by
/// numeric value, consecutive bit sequences assigned in that order. One
/// retransmission conveys log2(n1) sender bits then log2(n2) receiver bits.
class PathCode {
public:
    PathCode(std::vector<Address> sender_alternates, std::vector<Address> receiver_alternates,
             bool strict = true)
        : snd_(std::move(sender_alternates)), rcv_(std::move(receiver_alternates)) {
        if (snd_.empty() || rcv_.empty()) throw NoAlternatePath();
        std::sort(snd_.begin(), snd_.end());
        std::sort(rcv_.begin(), rcv_.end());
        snd_bits_ = usable_bits(snd_.size(), strict, "sender");
        rcv_bits_ = usable_bits(rcv_.size(), strict, "receiver");
        // Non-power-of-two counts: only the first 2^floor(log2(n)) addresses code.
        snd_.resize(size_t(1) << snd_bits_);
        rcv_.resize(size_t(1) << rcv_bits_);
    }

    int sender_bits() const { return snd_bits_; }
    int receiver_bits() const { return rcv_bits_; }
    int bits_per_retransmission() const { return snd_bits_ + rcv_bits_; }

    const Address& sender_address(uint64_t code) const { return snd_.at(size_t(code)); }
    const Address& receiver_address(uint64_t code) const { return rcv_.at(size_t(code)); }

    uint64_t sender_code(const Address& a) const { return index_of(snd_, a); }
    uint64_t receiver_code(const Address& a) const { return index_of(rcv_, a); }

private:
    static int usable_bits(size_t n, bool strict, const char* side) {
        if (n < 2)
            throw MultihomeError(std::string(side) + " needs at least 2 alternate addresses");
        int b = int(std::floor(std::log2(double(n))));
        if (strict && (size_t(1) << b) != n)
            throw MultihomeError(std::string(side) +
                                 " alternate address count must be a power of two in strict mode");
        return b;
    }
    static uint64_t index_of(const std::vector<Address>& v, const Address& a) {
        auto it = std::find(v.begin(), v.end(), a);
        if (it == v.end()) throw UnknownAddress();
        return uint64_t(it - v.begin());
    }

    std::vector<Address> snd_;
    std::vector<Address> rcv_;
    int snd_bits_ = 0;
    int rcv_bits_ = 0;
};

/// Path for one retransmission opportunity: the pair whose concatenated codes
/// equal the next sender+receiver payload bits. A short payload tail is
/// zero-padded on the right. Never the primary path — only alternates code.
inline std::pair<std::pair<Address, Address>, size_t>
mh_embed(const PathCode& code, const BitString& payload, size_t offset = 0) {
    size_t bs = size_t(code.sender_bits());
    size_t bd = size_t(code.receiver_bits());
    size_t avail = payload.size() > offset ? payload.size() - offset : 0;
    size_t n = std::min(avail, bs + bd);
    uint64_t v = payload.slice(offset, n).to_uint() << (bs + bd - n);
    uint64_t sc = v >> bd;
    uint64_t rc = v & ((uint64_t(1) << bd) - 1);
    return {{code.sender_address(sc), code.receiver_address(rc)}, n};
}

/// Concatenated per-event codes, in event order.
inline BitString mh_extract(const PathCode& code,
                            const std::vector<std::pair<Address, Address>>& events) {
    BitString out;
    for (const auto& [src, dst] : events) {
        out.append(BitString::from_uint(code.sender_code(src), size_t(code.sender_bits())));
        out.append(BitString::from_uint(code.receiver_code(dst), size_t(code.receiver_bits())));
    }
    return out;
}

/// Index just past the first occurrence of the agreed marker path sequence,
/// or nullopt when the marker never occurs (no covert decoding then).
inline std::optional<size_t>
mh_initiation(const std::vector<std::pair<Address, Address>>& events,
              const std::vector<std::pair<Address, Address>>& marker) {
    if (marker.empty()) throw MultihomeError("empty initiation marker");
    if (marker.size() > events.size()) return std::nullopt;
    for (size_t i = 0; i + marker.size() <= events.size(); ++i) {
        bool hit = true;
        for (size_t j = 0; j < marker.size(); ++j)
            if (events[i + j] != marker[j]) {
                hit = false;
                break;
            }
        if (hit) return i + marker.size();
    }
    return std::nullopt;
}

} // namespace sctpsteg::mh
