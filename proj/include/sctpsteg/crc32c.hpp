#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace sctpsteg {

// CRC32c (Castagnoli): reflected, poly 0x1EDC6F41, init/xorout 0xFFFFFFFF.
namespace detail {

inline const std::array<uint32_t, 256>& crc32c_table() {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int j = 0; j < 8; ++j)
                c = (c & 1) ? (c >> 1) ^ 0x82F63B78u : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    return table;
}

} // namespace detail

inline uint32_t crc32c_update(uint32_t crc, const uint8_t* data, size_t len) {
    const auto& t = detail::crc32c_table();
    for (size_t i = 0; i < len; ++i)
        crc = t[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc;
}

inline uint32_t crc32c(const uint8_t* data, size_t len) {
    return crc32c_update(0xFFFFFFFFu, data, len) ^ 0xFFFFFFFFu;
}

template <typename Container>
inline uint32_t crc32c(const Container& c) {
    return crc32c(c.data(), c.size());
}

} // namespace sctpsteg
