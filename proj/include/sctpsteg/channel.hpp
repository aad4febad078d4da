#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sctpsteg {

/// The nineteen covert channels, addressable by symbolic id.
enum class ChannelId {
    I1,  // INIT/INIT ACK Initiate Tag
    I2,  // Number of Inbound Streams, top byte
    D1,  // SSN on unordered DATA
    D2,  // Payload Protocol Identifier
    S1,  // SACK a_rwnd low bits
    S2,  // SACK duplicate-TSN selection
    A1,  // AUTH Shared Key Identifier
    P1,  // PAD chunk padding data
    VP1, // IPv4/IPv6 Address parameter
    VP2, // Heartbeat Info
    VP3, // Random parameter
    VP4, // ASCONF-Request Correlation ID
    VP5, // Padding Parameter in INIT
    MS,  // multi-streaming
    CO,  // chunk order
    CC,  // chunk count
    HY1, // hybrid: skipped-then-resent DATA
    HY2, // hybrid: orphaned fragment
    MH,  // multi-homing retransmission path
};

inline const std::vector<ChannelId>& all_channels() {
    static const std::vector<ChannelId> v = {
        ChannelId::I1,  ChannelId::I2,  ChannelId::D1, ChannelId::D2,  ChannelId::S1,
        ChannelId::S2,  ChannelId::A1,  ChannelId::P1, ChannelId::VP1, ChannelId::VP2,
        ChannelId::VP3, ChannelId::VP4, ChannelId::VP5, ChannelId::MS, ChannelId::CO,
        ChannelId::CC,  ChannelId::HY1, ChannelId::HY2, ChannelId::MH};
    return v;
}

inline std::string to_string(ChannelId id) {
    switch (id) {
    case ChannelId::I1: return "I1";
    case ChannelId::I2: return "I2";
    case ChannelId::D1: return "D1";
    case ChannelId::D2: return "D2";
    case ChannelId::S1: return "S1";
    case ChannelId::S2: return "S2";
    case ChannelId::A1: return "A1";
    case ChannelId::P1: return "P1";
    case ChannelId::VP1: return "VP1";
    case ChannelId::VP2: return "VP2";
    case ChannelId::VP3: return "VP3";
    case ChannelId::VP4: return "VP4";
    case ChannelId::VP5: return "VP5";
    case ChannelId::MS: return "MS";
    case ChannelId::CO: return "CO";
    case ChannelId::CC: return "CC";
    case ChannelId::HY1: return "HY1";
    case ChannelId::HY2: return "HY2";
    case ChannelId::MH: return "MH";
    }
    return "?";
}

inline std::optional<ChannelId> channel_from_string(const std::string& s) {
    for (ChannelId id : all_channels())
        if (to_string(id) == s) return id;
    return std::nullopt;
}

/// Per-channel potential bandwidth, as published. Fixed channels carry an
/// exact width; S1/S2/A1 carry a range; the rest vary with configuration.
struct CapacityEntry {
    ChannelId channel;
    enum class Kind { Exact, Range, Varies } kind;
    int bits_lo = 0; // Exact: the value; Range: inclusive lower bound
    int bits_hi = 0; // Range: inclusive upper bound
    enum class Unit { Chunk, Parameter, Packet } unit;
    std::string note;
};

/// The published bandwidth summary, one row per channel. The thirteen
/// content-modification rows are authoritative data that the channel
/// implementations are tested against.
inline const std::vector<CapacityEntry>& capacity_table() {
    using K = CapacityEntry::Kind;
    using U = CapacityEntry::Unit;
    static const std::vector<CapacityEntry> t = {
        {ChannelId::I1, K::Exact, 32, 32, U::Chunk, ""},
        {ChannelId::I2, K::Exact, 8, 8, U::Chunk, ""},
        {ChannelId::D1, K::Exact, 16, 16, U::Chunk, ""},
        {ChannelId::D2, K::Exact, 32, 32, U::Chunk, ""},
        {ChannelId::S1, K::Range, 3, 4, U::Chunk, ""},
        {ChannelId::S2, K::Range, 3, 4, U::Chunk, ""},
        {ChannelId::A1, K::Range, 1, 4, U::Chunk, ""},
        {ChannelId::P1, K::Varies, 0, 0, U::Chunk, "8 bits per padding byte"},
        {ChannelId::VP1, K::Exact, 32, 32, U::Parameter, "128 for IPv6"},
        {ChannelId::VP2, K::Exact, 320, 320, U::Chunk, "40-byte heartbeat info"},
        // Published table says 32 bits/chunk; the prose allows a 32-byte random
        // number (256 bits). The implementation supports the larger width; the
        // registry records the table value. Discrepancy surfaced, not resolved.
        {ChannelId::VP3, K::Exact, 32, 32, U::Chunk, "prose allows up to 256"},
        {ChannelId::VP4, K::Exact, 32, 32, U::Parameter, ""},
        {ChannelId::VP5, K::Varies, 0, 0, U::Chunk, "8 bits per padding byte"},
        {ChannelId::MS, K::Varies, 0, 0, U::Chunk, "log2(streams) per chunk"},
        {ChannelId::CO, K::Varies, 0, 0, U::Packet, "floor(log2(m!)) per packet"},
        {ChannelId::CC, K::Varies, 0, 0, U::Packet, "log2(max chunks) per packet"},
        {ChannelId::HY1, K::Varies, 0, 0, U::Packet, "payload bytes per covert event"},
        {ChannelId::HY2, K::Varies, 0, 0, U::Packet, "fragment bytes per covert event"},
        {ChannelId::MH, K::Varies, 0, 0, U::Packet, "log2(n1)+log2(n2) per retransmission"},
    };
    return t;
}

inline const CapacityEntry& capacity_entry(ChannelId id) {
    for (const auto& e : capacity_table())
        if (e.channel == id) return e;
    throw std::logic_error("capacity_table is missing a channel");
}

/// bits/unit × units/second × duty cycle → bits/second.
inline double throughput(double bits_per_unit, double units_per_second, double duty) {
    if (bits_per_unit < 0 || units_per_second < 0 || duty < 0)
        throw std::invalid_argument("throughput: negative argument");
    return bits_per_unit * units_per_second * duty;
}

} // namespace sctpsteg
