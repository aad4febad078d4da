#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simnet.hpp"
#include "wire.hpp"

namespace sctpsteg::cap {

struct CaptureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One observed packet: when, on which path, and the raw bytes.
struct CaptureRecord {
    uint64_t tick = 0;
    std::vector<uint8_t> src;
    std::vector<uint8_t> dst;
    std::vector<uint8_t> packet;

    bool operator==(const CaptureRecord&) const = default;
};

// SCTS container: magic "SCTS", version byte 1, then length-prefixed records.
constexpr char kMagic[4] = {'S', 'C', 'T', 'S'};
constexpr uint8_t kVersion = 1;

namespace detail {
inline void put_u32(std::ostream& os, uint32_t v) {
    char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
    os.write(b, 4);
}
inline void put_u64(std::ostream& os, uint64_t v) {
    for (int i = 7; i >= 0; --i) os.put(char(v >> (8 * i)));
}
inline uint32_t get_u32(std::istream& is) {
    uint8_t b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw CaptureError("truncated capture");
    return uint32_t(b[0]) << 24 | uint32_t(b[1]) << 16 | uint32_t(b[2]) << 8 | uint32_t(b[3]);
}
inline uint64_t get_u64(std::istream& is) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        int c = is.get();
        if (c < 0) throw CaptureError("truncated capture");
        v = v << 8 | uint64_t(uint8_t(c));
    }
    return v;
}
} // namespace detail

inline void write_capture(std::ostream& os, const std::vector<CaptureRecord>& records) {
    os.write(kMagic, 4);
    os.put(char(kVersion));
    for (const auto& r : records) {
        uint32_t len = uint32_t(8 + 1 + r.src.size() + 1 + r.dst.size() + r.packet.size());
        detail::put_u32(os, len);
        detail::put_u64(os, r.tick);
        os.put(char(uint8_t(r.src.size())));
        os.write(reinterpret_cast<const char*>(r.src.data()), long(r.src.size()));
        os.put(char(uint8_t(r.dst.size())));
        os.write(reinterpret_cast<const char*>(r.dst.data()), long(r.dst.size()));
        os.write(reinterpret_cast<const char*>(r.packet.data()), long(r.packet.size()));
    }
}

inline std::vector<CaptureRecord> read_capture(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kMagic, 4))
        throw CaptureError("bad capture magic");
    int ver = is.get();
    if (ver != kVersion) throw CaptureError("unsupported capture version");
    std::vector<CaptureRecord> out;
    while (is.peek() != EOF) {
        uint32_t len = detail::get_u32(is);
        if (len < 8 + 2) throw CaptureError("record too short");
        CaptureRecord r;
        r.tick = detail::get_u64(is);
        size_t remaining = len - 8;
        auto read_addr = [&](std::vector<uint8_t>& a) {
            int n = is.get();
            if (n < 0 || remaining < 1 + size_t(n)) throw CaptureError("truncated address");
            remaining -= 1 + size_t(n);
            a.resize(size_t(n));
            is.read(reinterpret_cast<char*>(a.data()), n);
        };
        read_addr(r.src);
        read_addr(r.dst);
        r.packet.resize(remaining);
        is.read(reinterpret_cast<char*>(r.packet.data()), long(remaining));
        if (!is) throw CaptureError("truncated record");
        out.push_back(std::move(r));
    }
    return out;
}

inline void save_capture(const std::string& path, const std::vector<CaptureRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CaptureError("cannot open for writing: " + path);
    write_capture(f, records);
}

inline std::vector<CaptureRecord> load_capture(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CaptureError("cannot open: " + path);
    return read_capture(f);
}

/// Wire transmissions of a simulation run, as an observer would capture them.
inline std::vector<CaptureRecord> capture_from_events(const std::vector<sim::SimEvent>& events) {
    std::vector<CaptureRecord> out;
    for (const auto& e : events) {
        switch (e.kind) {
        case sim::EventKind::Send:
        case sim::EventKind::Retransmit:
        case sim::EventKind::Sack:
        case sim::EventKind::ForwardTsn:
            out.push_back({e.tick, e.src, e.dst, wire::encode_packet(*e.packet)});
            break;
        default: break;
        }
    }
    return out;
}

inline std::string hex_encode(const std::vector<uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 15]);
    }
    return s;
}

inline std::vector<uint8_t> hex_decode(const std::string& s) {
    if (s.size() % 2) throw CaptureError("odd hex length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw CaptureError("bad hex digit");
    };
    std::vector<uint8_t> out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = uint8_t(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
    return out;
}

/// JSON-lines event log: one event per line with tick, kind, path, hex packet.
inline void write_event_log(std::ostream& os, const std::vector<sim::SimEvent>& events) {
    for (const auto& e : events) {
        os << "{\"tick\":" << e.tick << ",\"seq\":" << e.seq << ",\"kind\":\""
           << sim::to_string(e.kind) << "\"";
        if (!e.src.empty()) os << ",\"src\":\"" << hex_encode(e.src) << "\"";
        if (!e.dst.empty()) os << ",\"dst\":\"" << hex_encode(e.dst) << "\"";
        if (e.packet) os << ",\"packet\":\"" << hex_encode(wire::encode_packet(*e.packet)) << "\"";
        if (e.kind == sim::EventKind::AppDelivery)
            os << ",\"stream\":" << e.stream << ",\"data\":\"" << hex_encode(e.data) << "\"";
        os << "}\n";
    }
}

} // namespace sctpsteg::cap
