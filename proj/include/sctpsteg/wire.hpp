#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "crc32c.hpp"

namespace sctpsteg::wire {

// Chunk type codes (RFC 4960 + extensions this toolkit models).
enum ChunkType : uint8_t {
    CT_DATA = 0,
    CT_INIT = 1,
    CT_INIT_ACK = 2,
    CT_SACK = 3,
    CT_HEARTBEAT = 4,
    CT_ABORT = 6,
    CT_SHUTDOWN = 7,
    CT_ERROR = 9,
    CT_COOKIE_ECHO = 10,
    CT_COOKIE_ACK = 11,
    CT_AUTH = 15,
    CT_PAD = 132,
    CT_FORWARD_TSN = 192,
    CT_ASCONF = 193,
};

// Variable parameter type codes.
enum ParamType : uint16_t {
    PT_HEARTBEAT_INFO = 1,
    PT_IPV4_ADDR = 5,
    PT_IPV6_ADDR = 6,
    PT_RANDOM = 32770,
    PT_PADDING = 32773,
    PT_ADD_IP = 49153,
    PT_DELETE_IP = 49154,
    PT_SET_PRIMARY = 49156,
};

// DATA chunk flag bits.
constexpr uint8_t DATA_FLAG_E = 0x01; // ending fragment
constexpr uint8_t DATA_FLAG_B = 0x02; // beginning fragment
constexpr uint8_t DATA_FLAG_U = 0x04; // unordered

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Truncated : WireError {
    Truncated() : WireError("truncated input") {}
};
struct BadChecksum : WireError {
    BadChecksum() : WireError("CRC32c mismatch") {}
};
struct BadLengthField : WireError {
    explicit BadLengthField(const std::string& what) : WireError("bad length field: " + what) {}
};
struct BodyMismatch : WireError {
    explicit BodyMismatch(const std::string& what) : WireError("body mismatch: " + what) {}
};
struct Oversize : WireError {
    Oversize() : WireError("packet exceeds MTU budget") {}
};

struct VarParam {
    uint16_t type = 0;
    std::vector<uint8_t> value;

    bool operator==(const VarParam&) const = default;
};

struct DataBody {
    uint32_t tsn = 0;
    uint16_t stream_id = 0;
    uint16_t ssn = 0;
    uint32_t ppid = 0;
    std::vector<uint8_t> payload;

    bool operator==(const DataBody&) const = default;
};

// Shared by INIT and INIT_ACK.
struct InitBody {
    uint32_t initiate_tag = 1;
    uint32_t a_rwnd = 65536;
    uint16_t outbound_streams = 1;
    uint16_t inbound_streams = 1;
    uint32_t initial_tsn = 0;
    std::vector<VarParam> params;

    bool operator==(const InitBody&) const = default;
};

struct SackBody {
    uint32_t cum_tsn_ack = 0;
    uint32_t a_rwnd = 65536;
    std::vector<std::pair<uint16_t, uint16_t>> gap_blocks; // (start, end) offsets
    std::vector<uint32_t> dup_tsns;

    bool operator==(const SackBody&) const = default;
};

struct ForwardTsnBody {
    uint32_t new_cum_tsn = 0;
    std::vector<std::pair<uint16_t, uint16_t>> skipped; // (stream id, ssn)

    bool operator==(const ForwardTsnBody&) const = default;
};

struct AuthBody {
    uint16_t shared_key_id = 0;
    uint16_t hmac_id = 1;
    std::vector<uint8_t> hmac;

    bool operator==(const AuthBody&) const = default;
};

// HEARTBEAT: parameter list only.
struct HeartbeatBody {
    std::vector<VarParam> params;

    bool operator==(const HeartbeatBody&) const = default;
};

// ASCONF: serial number + parameter list.
struct AsconfBody {
    uint32_t serial = 0;
    std::vector<VarParam> params;

    bool operator==(const AsconfBody&) const = default;
};

// Everything else (PAD value bytes, cookies, unknown chunk types) stays opaque.
struct RawBody {
    std::vector<uint8_t> bytes;

    bool operator==(const RawBody&) const = default;
};

using ChunkBody = std::variant<DataBody, InitBody, SackBody, ForwardTsnBody, AuthBody,
                               HeartbeatBody, AsconfBody, RawBody>;

struct Chunk {
    uint8_t type = CT_PAD;
    uint8_t flags = 0;
    ChunkBody body = RawBody{};

    bool operator==(const Chunk&) const = default;

    DataBody& data() { return std::get<DataBody>(body); }
    const DataBody& data() const { return std::get<DataBody>(body); }
    InitBody& init() { return std::get<InitBody>(body); }
    const InitBody& init() const { return std::get<InitBody>(body); }
    SackBody& sack() { return std::get<SackBody>(body); }
    const SackBody& sack() const { return std::get<SackBody>(body); }
};

struct CommonHeader {
    uint16_t src_port = 5000;
    uint16_t dst_port = 5001;
    uint32_t verification_tag = 0;
    uint32_t checksum = 0; // filled in by encode_packet

    bool operator==(const CommonHeader&) const = default;
};

struct SctpPacket {
    CommonHeader header;
    std::vector<Chunk> chunks;

    bool operator==(const SctpPacket&) const = default;
};

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

class Writer {
public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) {
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }
    void u32(uint32_t v) {
        buf_.push_back(uint8_t(v >> 24));
        buf_.push_back(uint8_t(v >> 16));
        buf_.push_back(uint8_t(v >> 8));
        buf_.push_back(uint8_t(v));
    }
    void bytes(const std::vector<uint8_t>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void pad4() {
        while (buf_.size() % 4) buf_.push_back(0);
    }
    size_t size() const { return buf_.size(); }
    void patch_u16(size_t at, uint16_t v) {
        buf_[at] = uint8_t(v >> 8);
        buf_[at + 1] = uint8_t(v);
    }
    void patch_u32(size_t at, uint32_t v) {
        buf_[at] = uint8_t(v >> 24);
        buf_[at + 1] = uint8_t(v >> 16);
        buf_[at + 2] = uint8_t(v >> 8);
        buf_[at + 3] = uint8_t(v);
    }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    std::vector<uint8_t> buf_;
};

class Reader {
public:
    Reader(const uint8_t* p, size_t n) : p_(p), n_(n) {}
    size_t remaining() const { return n_ - pos_; }
    size_t pos() const { return pos_; }
    uint8_t u8() {
        need(1);
        return p_[pos_++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = uint16_t(p_[pos_] << 8 | p_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = uint32_t(p_[pos_]) << 24 | uint32_t(p_[pos_ + 1]) << 16 |
                     uint32_t(p_[pos_ + 2]) << 8 | uint32_t(p_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    std::vector<uint8_t> bytes(size_t n) {
        need(n);
        std::vector<uint8_t> out(p_ + pos_, p_ + pos_ + n);
        pos_ += n;
        return out;
    }
    void skip(size_t n) {
        need(n);
        pos_ += n;
    }

private:
    void need(size_t n) const {
        if (pos_ + n > n_) throw Truncated();
    }
    const uint8_t* p_;
    size_t n_;
    size_t pos_ = 0;
};

inline void write_params(Writer& w, const std::vector<VarParam>& params) {
    for (const auto& p : params) {
        w.u16(p.type);
        w.u16(uint16_t(4 + p.value.size()));
        w.bytes(p.value);
        w.pad4();
    }
}

inline std::vector<VarParam> read_params(Reader& r) {
    std::vector<VarParam> out;
    while (r.remaining() >= 4) {
        uint16_t type = r.u16();
        uint16_t len = r.u16();
        if (len < 4) throw BadLengthField("parameter length < 4");
        size_t vlen = len - 4;
        if (vlen > r.remaining()) throw BadLengthField("parameter overruns chunk");
        VarParam p{type, r.bytes(vlen)};
        // skip padding to 4-byte boundary
        size_t pad = (4 - len % 4) % 4;
        if (pad > r.remaining()) pad = r.remaining();
        r.skip(pad);
        out.push_back(std::move(p));
    }
    if (r.remaining() != 0) throw BadLengthField("trailing parameter bytes");
    return out;
}

inline void write_chunk(Writer& w, const Chunk& c) {
    size_t start = w.size();
    w.u8(c.type);
    w.u8(c.flags);
    size_t len_at = w.size();
    w.u16(0); // patched below
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, DataBody>) {
                if (c.type != CT_DATA) throw BodyMismatch("DataBody on non-DATA chunk");
                w.u32(body.tsn);
                w.u16(body.stream_id);
                w.u16(body.ssn);
                w.u32(body.ppid);
                w.bytes(body.payload);
            } else if constexpr (std::is_same_v<T, InitBody>) {
                if (c.type != CT_INIT && c.type != CT_INIT_ACK)
                    throw BodyMismatch("InitBody on non-INIT chunk");
                w.u32(body.initiate_tag);
                w.u32(body.a_rwnd);
                w.u16(body.outbound_streams);
                w.u16(body.inbound_streams);
                w.u32(body.initial_tsn);
                write_params(w, body.params);
            } else if constexpr (std::is_same_v<T, SackBody>) {
                if (c.type != CT_SACK) throw BodyMismatch("SackBody on non-SACK chunk");
                w.u32(body.cum_tsn_ack);
                w.u32(body.a_rwnd);
                w.u16(uint16_t(body.gap_blocks.size()));
                w.u16(uint16_t(body.dup_tsns.size()));
                for (auto [s, e] : body.gap_blocks) {
                    w.u16(s);
                    w.u16(e);
                }
                for (uint32_t t : body.dup_tsns) w.u32(t);
            } else if constexpr (std::is_same_v<T, ForwardTsnBody>) {
                if (c.type != CT_FORWARD_TSN)
                    throw BodyMismatch("ForwardTsnBody on non-FORWARD-TSN chunk");
                w.u32(body.new_cum_tsn);
                for (auto [sid, ssn] : body.skipped) {
                    w.u16(sid);
                    w.u16(ssn);
                }
            } else if constexpr (std::is_same_v<T, AuthBody>) {
                if (c.type != CT_AUTH) throw BodyMismatch("AuthBody on non-AUTH chunk");
                w.u16(body.shared_key_id);
                w.u16(body.hmac_id);
                w.bytes(body.hmac);
            } else if constexpr (std::is_same_v<T, HeartbeatBody>) {
                if (c.type != CT_HEARTBEAT)
                    throw BodyMismatch("HeartbeatBody on non-HEARTBEAT chunk");
                write_params(w, body.params);
            } else if constexpr (std::is_same_v<T, AsconfBody>) {
                if (c.type != CT_ASCONF) throw BodyMismatch("AsconfBody on non-ASCONF chunk");
                w.u32(body.serial);
                write_params(w, body.params);
            } else { // RawBody
                w.bytes(body.bytes);
            }
        },
        c.body);
    w.patch_u16(len_at, uint16_t(w.size() - start));
    w.pad4();
}

inline Chunk read_chunk(Reader& r) {
    Chunk c;
    c.type = r.u8();
    c.flags = r.u8();
    uint16_t len = r.u16();
    if (len < 4) throw BadLengthField("chunk length < 4");
    size_t body_len = len - 4;
    if (body_len > r.remaining()) throw BadLengthField("chunk overruns packet");
    std::vector<uint8_t> raw = r.bytes(body_len);
    size_t pad = (4 - len % 4) % 4;
    if (pad > r.remaining()) pad = r.remaining();
    r.skip(pad);

    Reader b(raw.data(), raw.size());
    switch (c.type) {
    case CT_DATA: {
        DataBody d;
        d.tsn = b.u32();
        d.stream_id = b.u16();
        d.ssn = b.u16();
        d.ppid = b.u32();
        d.payload = b.bytes(b.remaining());
        c.body = std::move(d);
        break;
    }
    case CT_INIT:
    case CT_INIT_ACK: {
        InitBody i;
        i.initiate_tag = b.u32();
        i.a_rwnd = b.u32();
        i.outbound_streams = b.u16();
        i.inbound_streams = b.u16();
        i.initial_tsn = b.u32();
        i.params = read_params(b);
        c.body = std::move(i);
        break;
    }
    case CT_SACK: {
        SackBody s;
        s.cum_tsn_ack = b.u32();
        s.a_rwnd = b.u32();
        uint16_t ngap = b.u16();
        uint16_t ndup = b.u16();
        for (uint16_t i = 0; i < ngap; ++i) {
            uint16_t st = b.u16();
            uint16_t en = b.u16();
            s.gap_blocks.emplace_back(st, en);
        }
        for (uint16_t i = 0; i < ndup; ++i) s.dup_tsns.push_back(b.u32());
        if (b.remaining()) throw BadLengthField("trailing SACK bytes");
        c.body = std::move(s);
        break;
    }
    case CT_FORWARD_TSN: {
        ForwardTsnBody f;
        f.new_cum_tsn = b.u32();
        while (b.remaining() >= 4) {
            uint16_t sid = b.u16();
            uint16_t ssn = b.u16();
            f.skipped.emplace_back(sid, ssn);
        }
        if (b.remaining()) throw BadLengthField("trailing FORWARD-TSN bytes");
        c.body = std::move(f);
        break;
    }
    case CT_AUTH: {
        AuthBody a;
        a.shared_key_id = b.u16();
        a.hmac_id = b.u16();
        a.hmac = b.bytes(b.remaining());
        c.body = std::move(a);
        break;
    }
    case CT_HEARTBEAT: {
        HeartbeatBody h;
        h.params = read_params(b);
        c.body = std::move(h);
        break;
    }
    case CT_ASCONF: {
        AsconfBody a;
        a.serial = b.u32();
        a.params = read_params(b);
        c.body = std::move(a);
        break;
    }
    default:
        // PAD, cookies, unknown types: opaque, preserved verbatim
        c.body = RawBody{std::move(raw)};
        break;
    }
    return c;
}

} // namespace detail

/// Default payload budget: 1500-byte MTU minus 20-byte IP header.
constexpr size_t kDefaultMaxPacketBytes = 1480;

inline std::vector<uint8_t> encode_packet(const SctpPacket& pkt, bool strict_mtu = false,
                                          size_t max_bytes = kDefaultMaxPacketBytes) {
    if (pkt.chunks.empty()) throw BodyMismatch("packet must contain at least one chunk");
    detail::Writer w;
    w.u16(pkt.header.src_port);
    w.u16(pkt.header.dst_port);
    w.u32(pkt.header.verification_tag);
    size_t crc_at = w.size();
    w.u32(0);
    for (const auto& c : pkt.chunks) detail::write_chunk(w, c);
    std::vector<uint8_t> out = w.take();
    if (strict_mtu && out.size() > max_bytes) throw Oversize();
    uint32_t crc = crc32c(out.data(), out.size());
    out[crc_at] = uint8_t(crc >> 24);
    out[crc_at + 1] = uint8_t(crc >> 16);
    out[crc_at + 2] = uint8_t(crc >> 8);
    out[crc_at + 3] = uint8_t(crc);
    return out;
}

inline SctpPacket decode_packet(const std::vector<uint8_t>& bytes, bool verify_crc = true) {
    if (bytes.size() < 16) throw Truncated();
    detail::Reader r(bytes.data(), bytes.size());
    SctpPacket pkt;
    pkt.header.src_port = r.u16();
    pkt.header.dst_port = r.u16();
    pkt.header.verification_tag = r.u32();
    pkt.header.checksum = r.u32();
    if (verify_crc) {
        std::vector<uint8_t> zeroed = bytes;
        zeroed[8] = zeroed[9] = zeroed[10] = zeroed[11] = 0;
        if (crc32c(zeroed.data(), zeroed.size()) != pkt.header.checksum) throw BadChecksum();
    }
    while (r.remaining() > 0) {
        if (r.remaining() < 4) throw Truncated();
        pkt.chunks.push_back(detail::read_chunk(r));
    }
    if (pkt.chunks.empty()) throw Truncated();
    return pkt;
}

/// Well-formed chunk ordering: all control chunks precede all DATA chunks,
/// and DATA chunks appear in increasing TSN. Violations are representable
/// (channels exploit them); this predicate just reports.
inline bool packet_order_ok(const SctpPacket& pkt) {
    bool seen_data = false;
    uint32_t last_tsn = 0;
    bool have_tsn = false;
    for (const auto& c : pkt.chunks) {
        if (c.type == CT_DATA) {
            uint32_t tsn = c.data().tsn;
            if (have_tsn && tsn <= last_tsn) return false;
            last_tsn = tsn;
            have_tsn = true;
            seen_data = true;
        } else if (seen_data) {
            return false;
        }
    }
    return true;
}

// Convenience constructors used all over the test and channel code.

inline Chunk make_data(uint32_t tsn, uint16_t sid, uint16_t ssn, uint32_t ppid,
                       std::vector<uint8_t> payload, uint8_t flags = DATA_FLAG_B | DATA_FLAG_E) {
    Chunk c;
    c.type = CT_DATA;
    c.flags = flags;
    c.body = DataBody{tsn, sid, ssn, ppid, std::move(payload)};
    return c;
}

inline Chunk make_pad(size_t value_bytes) {
    Chunk c;
    c.type = CT_PAD;
    c.body = RawBody{std::vector<uint8_t>(value_bytes, 0)};
    return c;
}

inline Chunk make_init(uint8_t type, InitBody body) {
    Chunk c;
    c.type = type;
    c.body = std::move(body);
    return c;
}

inline Chunk make_sack(uint32_t cum_tsn, uint32_t a_rwnd = 65536) {
    Chunk c;
    c.type = CT_SACK;
    c.body = SackBody{cum_tsn, a_rwnd, {}, {}};
    return c;
}

} // namespace sctpsteg::wire
