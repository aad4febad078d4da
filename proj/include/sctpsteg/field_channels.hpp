#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bits.hpp"
#include "channel.hpp"
#include "wire.hpp"

namespace sctpsteg::field {

struct FieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CarrierAbsent : FieldError {
    explicit CarrierAbsent(const std::string& what) : FieldError("carrier absent: " + what) {}
};
struct ConstraintViolation : FieldError {
    explicit ConstraintViolation(const std::string& what)
        : FieldError("constraint violation: " + what) {}
};
struct CapacityZero : FieldError {
    explicit CapacityZero(const std::string& what) : FieldError("zero capacity: " + what) {}
};

/// Association-context snapshot the content channels need: S2 wants the
/// recently acked TSN window, A1 the configured shared-key count.
struct FieldContext {
    std::vector<uint32_t> recent_acked_tsns; // most recent first, >= 3 for S2
    int shared_key_count = 4;                // A1: k = floor(log2(count))
    int s1_bits = 4;                         // S1: 3 or 4 low bits of a_rwnd
    bool vp1_plausible = false;              // restrict VP1 to unicast-looking addresses
};

struct EmbedResult {
    wire::SctpPacket packet;
    size_t bits_consumed = 0;
};

namespace detail {

inline int a1_key_bits(int key_count) {
    if (key_count < 2) throw ConstraintViolation("A1 needs at least 2 shared keys");
    int k = int(std::floor(std::log2(double(key_count))));
    return std::min(k, 4);
}

/// Payload prefix as an unsigned value, left-aligned in `width` bits and
/// zero-padded on the right. Returns (value, bits actually consumed).
inline std::pair<uint64_t, size_t> take_uint(const BitString& payload, size_t width) {
    size_t n = std::min(payload.size(), width);
    uint64_t v = payload.prefix(n).to_uint();
    v <<= (width - n);
    return {v, n};
}

/// Payload prefix written over `bytes`, MSB-first, untouched tail preserved?
/// No: the whole field is the carrier, so bits beyond the payload are zeroed.
inline size_t take_bytes(const BitString& payload, std::vector<uint8_t>& bytes) {
    size_t width = bytes.size() * 8;
    size_t n = std::min(payload.size(), width);
    std::fill(bytes.begin(), bytes.end(), 0);
    for (size_t i = 0; i < n; ++i)
        if (payload.bit(i)) bytes[i / 8] |= uint8_t(0x80u >> (i % 8));
    return n;
}

template <typename Pred>
inline wire::Chunk* find_chunk(wire::SctpPacket& pkt, Pred pred) {
    for (auto& c : pkt.chunks)
        if (pred(c)) return &c;
    return nullptr;
}

inline std::vector<wire::VarParam>* chunk_params(wire::Chunk& c) {
    switch (c.type) {
    case wire::CT_INIT:
    case wire::CT_INIT_ACK: return &std::get<wire::InitBody>(c.body).params;
    case wire::CT_HEARTBEAT: return &std::get<wire::HeartbeatBody>(c.body).params;
    case wire::CT_ASCONF: return &std::get<wire::AsconfBody>(c.body).params;
    default: return nullptr;
    }
}

template <typename Pred>
inline wire::VarParam* find_param(wire::SctpPacket& pkt, Pred pred) {
    for (auto& c : pkt.chunks) {
        auto* params = chunk_params(c);
        if (!params) continue;
        for (auto& p : *params)
            if (pred(p)) return &p;
    }
    return nullptr;
}

inline bool is_asconf_addr_param(const wire::VarParam& p) {
    return p.type == wire::PT_ADD_IP || p.type == wire::PT_DELETE_IP ||
           p.type == wire::PT_SET_PRIMARY;
}

} // namespace detail

/// Embed the next payload bits into the channel's carrier field of `pkt`.
/// Only the target bits change; the CRC is recomputed at serialization time.
inline EmbedResult embed_field(ChannelId id, const wire::SctpPacket& in, const BitString& payload,
                               const FieldContext& ctx = {}) {
    using namespace wire;
    if (payload.empty()) throw FieldError("empty payload");
    EmbedResult res{in, 0};
    SctpPacket& pkt = res.packet;

    switch (id) {
    case ChannelId::I1: {
        auto* c = detail::find_chunk(
            pkt, [](const Chunk& c) { return c.type == CT_INIT || c.type == CT_INIT_ACK; });
        if (!c) throw CarrierAbsent("no INIT/INIT ACK chunk");
        auto [v, n] = detail::take_uint(payload, 32);
        if (v == 0) throw ConstraintViolation("Initiate Tag must not be 0");
        std::get<InitBody>(c->body).initiate_tag = uint32_t(v);
        res.bits_consumed = n;
        break;
    }
    case ChannelId::I2: {
        auto* c = detail::find_chunk(
            pkt, [](const Chunk& c) { return c.type == CT_INIT || c.type == CT_INIT_ACK; });
        if (!c) throw CarrierAbsent("no INIT/INIT ACK chunk");
        auto [v, n] = detail::take_uint(payload, 8);
        auto& body = std::get<InitBody>(c->body);
        uint16_t updated = uint16_t((v << 8) | (body.inbound_streams & 0xFF));
        if (updated == 0) throw ConstraintViolation("inbound stream count must stay >= 1");
        body.inbound_streams = updated;
        res.bits_consumed = n;
        break;
    }
    case ChannelId::D1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) {
            return c.type == CT_DATA && (c.flags & DATA_FLAG_U);
        });
        if (!c) throw CarrierAbsent("no unordered DATA chunk");
        auto [v, n] = detail::take_uint(payload, 16);
        c->data().ssn = uint16_t(v);
        res.bits_consumed = n;
        break;
    }
    case ChannelId::D2: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_DATA; });
        if (!c) throw CarrierAbsent("no DATA chunk");
        auto [v, n] = detail::take_uint(payload, 32);
        c->data().ppid = uint32_t(v);
        res.bits_consumed = n;
        break;
    }
    case ChannelId::S1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_SACK; });
        if (!c) throw CarrierAbsent("no SACK chunk");
        if (ctx.s1_bits != 3 && ctx.s1_bits != 4)
            throw ConstraintViolation("S1 width must be 3 or 4 bits");
        auto [v, n] = detail::take_uint(payload, size_t(ctx.s1_bits));
        uint32_t mask = (1u << ctx.s1_bits) - 1;
        auto& s = c->sack();
        s.a_rwnd = (s.a_rwnd & ~mask) | uint32_t(v);
        res.bits_consumed = n;
        break;
    }
    case ChannelId::S2: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_SACK; });
        if (!c) throw CarrierAbsent("no SACK chunk");
        if (ctx.recent_acked_tsns.size() < 3)
            throw CarrierAbsent("S2 needs a 3-TSN recent-ack window");
        auto [v, n] = detail::take_uint(payload, 3);
        if (v == 0) throw ConstraintViolation("S2 bitmap must not be 0");
        auto& s = c->sack();
        s.dup_tsns.clear();
        for (int i = 0; i < 3; ++i)
            if (v & (1u << (2 - i))) s.dup_tsns.push_back(ctx.recent_acked_tsns[size_t(i)]);
        res.bits_consumed = n;
        break;
    }
    case ChannelId::A1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_AUTH; });
        if (!c) throw CarrierAbsent("no AUTH chunk");
        int k = detail::a1_key_bits(ctx.shared_key_count);
        auto [v, n] = detail::take_uint(payload, size_t(k));
        std::get<AuthBody>(c->body).shared_key_id = uint16_t(v);
        res.bits_consumed = n;
        break;
    }
    case ChannelId::P1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_PAD; });
        if (!c) throw CarrierAbsent("no PAD chunk");
        auto& raw = std::get<RawBody>(c->body).bytes;
        if (raw.empty()) throw CapacityZero("PAD chunk has no padding data");
        res.bits_consumed = detail::take_bytes(payload, raw);
        break;
    }
    case ChannelId::VP1: {
        auto* p = detail::find_param(pkt, [](const VarParam& p) {
            return p.type == PT_IPV4_ADDR || p.type == PT_IPV6_ADDR;
        });
        if (!p) throw CarrierAbsent("no IPv4/IPv6 Address parameter");
        size_t expect = p->type == PT_IPV4_ADDR ? 4 : 16;
        if (p->value.size() != expect)
            throw ConstraintViolation("malformed address parameter length");
        if (ctx.vp1_plausible) {
            // First octet pinned to a private/global unicast prefix; remaining
            // bytes carry payload.
            std::vector<uint8_t> tail(expect - 1, 0);
            BitString bits = payload;
            res.bits_consumed = detail::take_bytes(bits, tail);
            p->value[0] = p->type == PT_IPV4_ADDR ? 0x0A : 0x20;
            std::copy(tail.begin(), tail.end(), p->value.begin() + 1);
        } else {
            res.bits_consumed = detail::take_bytes(payload, p->value);
        }
        break;
    }
    case ChannelId::VP2: {
        auto* p = detail::find_param(
            pkt, [](const VarParam& p) { return p.type == PT_HEARTBEAT_INFO; });
        if (!p) throw CarrierAbsent("no Heartbeat Info parameter");
        if (p->value.empty()) throw CapacityZero("empty heartbeat info");
        res.bits_consumed = detail::take_bytes(payload, p->value);
        break;
    }
    case ChannelId::VP3: {
        auto* p = detail::find_param(pkt, [](const VarParam& p) { return p.type == PT_RANDOM; });
        if (!p) throw CarrierAbsent("no Random parameter");
        if (p->value.empty()) throw CapacityZero("empty random number");
        res.bits_consumed = detail::take_bytes(payload, p->value);
        break;
    }
    case ChannelId::VP4: {
        auto* p = detail::find_param(pkt, detail::is_asconf_addr_param);
        if (!p) throw CarrierAbsent("no ASCONF address parameter");
        if (p->value.size() < 4)
            throw ConstraintViolation("address parameter lacks correlation id");
        auto [v, n] = detail::take_uint(payload, 32);
        for (int i = 0; i < 4; ++i) p->value[size_t(i)] = uint8_t(v >> (24 - 8 * i));
        res.bits_consumed = n;
        break;
    }
    case ChannelId::VP5: {
        auto* p = detail::find_param(pkt, [](const VarParam& p) { return p.type == PT_PADDING; });
        if (!p) throw CarrierAbsent("no Padding parameter");
        if (p->value.empty()) throw CapacityZero("padding parameter has no data");
        res.bits_consumed = detail::take_bytes(payload, p->value);
        break;
    }
    default:
        throw FieldError("not a content-modification channel: " + sctpsteg::to_string(id));
    }
    return res;
}

/// Syntactic extraction: reads whatever the carrier field currently holds.
/// A clean packet yields bits too — "no covert data" is indistinguishable
/// from an all-zero payload by design.
inline BitString extract_field(ChannelId id, const wire::SctpPacket& in,
                               const FieldContext& ctx = {}) {
    using namespace wire;
    SctpPacket pkt = in; // find_* helpers want mutable access
    switch (id) {
    case ChannelId::I1: {
        auto* c = detail::find_chunk(
            pkt, [](const Chunk& c) { return c.type == CT_INIT || c.type == CT_INIT_ACK; });
        if (!c) throw CarrierAbsent("no INIT/INIT ACK chunk");
        return BitString::from_uint(std::get<InitBody>(c->body).initiate_tag, 32);
    }
    case ChannelId::I2: {
        auto* c = detail::find_chunk(
            pkt, [](const Chunk& c) { return c.type == CT_INIT || c.type == CT_INIT_ACK; });
        if (!c) throw CarrierAbsent("no INIT/INIT ACK chunk");
        return BitString::from_uint(std::get<InitBody>(c->body).inbound_streams >> 8, 8);
    }
    case ChannelId::D1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) {
            return c.type == CT_DATA && (c.flags & DATA_FLAG_U);
        });
        if (!c) throw CarrierAbsent("no unordered DATA chunk");
        return BitString::from_uint(c->data().ssn, 16);
    }
    case ChannelId::D2: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_DATA; });
        if (!c) throw CarrierAbsent("no DATA chunk");
        return BitString::from_uint(c->data().ppid, 32);
    }
    case ChannelId::S1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_SACK; });
        if (!c) throw CarrierAbsent("no SACK chunk");
        uint32_t mask = (1u << ctx.s1_bits) - 1;
        return BitString::from_uint(c->sack().a_rwnd & mask, size_t(ctx.s1_bits));
    }
    case ChannelId::S2: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_SACK; });
        if (!c) throw CarrierAbsent("no SACK chunk");
        if (ctx.recent_acked_tsns.size() < 3)
            throw CarrierAbsent("S2 needs a 3-TSN recent-ack window");
        uint64_t v = 0;
        for (int i = 0; i < 3; ++i) {
            const auto& dups = c->sack().dup_tsns;
            bool present = std::find(dups.begin(), dups.end(),
                                     ctx.recent_acked_tsns[size_t(i)]) != dups.end();
            v = (v << 1) | (present ? 1 : 0);
        }
        return BitString::from_uint(v, 3);
    }
    case ChannelId::A1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_AUTH; });
        if (!c) throw CarrierAbsent("no AUTH chunk");
        int k = detail::a1_key_bits(ctx.shared_key_count);
        uint32_t mask = (1u << k) - 1;
        return BitString::from_uint(std::get<AuthBody>(c->body).shared_key_id & mask, size_t(k));
    }
    case ChannelId::P1: {
        auto* c = detail::find_chunk(pkt, [](const Chunk& c) { return c.type == CT_PAD; });
        if (!c) throw CarrierAbsent("no PAD chunk");
        return BitString::from_bytes(std::get<RawBody>(c->body).bytes);
    }
    case ChannelId::VP1: {
        auto* p = detail::find_param(pkt, [](const VarParam& p) {
            return p.type == PT_IPV4_ADDR || p.type == PT_IPV6_ADDR;
        });
        if (!p) throw CarrierAbsent("no IPv4/IPv6 Address parameter");
        if (ctx.vp1_plausible)
            return BitString::from_bytes({p->value.begin() + 1, p->value.end()});
        return BitString::from_bytes(p->value);
    }
    case ChannelId::VP2: {
        auto* p = detail::find_param(
            pkt, [](const VarParam& p) { return p.type == PT_HEARTBEAT_INFO; });
        if (!p) throw CarrierAbsent("no Heartbeat Info parameter");
        return BitString::from_bytes(p->value);
    }
    case ChannelId::VP3: {
        auto* p = detail::find_param(pkt, [](const VarParam& p) { return p.type == PT_RANDOM; });
        if (!p) throw CarrierAbsent("no Random parameter");
        return BitString::from_bytes(p->value);
    }
    case ChannelId::VP4: {
        auto* p = detail::find_param(pkt, detail::is_asconf_addr_param);
        if (!p) throw CarrierAbsent("no ASCONF address parameter");
        if (p->value.size() < 4)
            throw ConstraintViolation("address parameter lacks correlation id");
        uint32_t v = uint32_t(p->value[0]) << 24 | uint32_t(p->value[1]) << 16 |
                     uint32_t(p->value[2]) << 8 | uint32_t(p->value[3]);
        return BitString::from_uint(v, 32);
    }
    case ChannelId::VP5: {
        auto* p = detail::find_param(pkt, [](const VarParam& p) { return p.type == PT_PADDING; });
        if (!p) throw CarrierAbsent("no Padding parameter");
        return BitString::from_bytes(p->value);
    }
    default:
        throw FieldError("not a content-modification channel: " + sctpsteg::to_string(id));
    }
}

/// Carrier capacity of one packet for the given channel, in bits.
/// Padding-based channels depend on the carrier's padding length.
inline size_t field_width(ChannelId id, const wire::SctpPacket& in, const FieldContext& ctx = {}) {
    return extract_field(id, in, ctx).size();
}

} // namespace sctpsteg::field
