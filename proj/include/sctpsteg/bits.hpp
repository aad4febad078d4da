#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sctpsteg {

/// Ordered sequence of bits. Byte materialization is MSB-first: bit 0 of
/// the string is the most significant bit of byte 0.
class BitString {
public:
    BitString() = default;

    explicit BitString(const std::string& ascii) {
        bits_.reserve(ascii.size());
        for (char c : ascii) {
            if (c != '0' && c != '1') throw std::invalid_argument("BitString: not a 0/1 string");
            bits_.push_back(c == '1');
        }
    }

    static BitString from_bytes(const std::vector<uint8_t>& bytes) {
        BitString s;
        s.bits_.reserve(bytes.size() * 8);
        for (uint8_t b : bytes)
            for (int i = 7; i >= 0; --i) s.bits_.push_back((b >> i) & 1);
        return s;
    }

    /// Low `width` bits of `value`, MSB-first.
    static BitString from_uint(uint64_t value, size_t width) {
        BitString s;
        s.bits_.reserve(width);
        for (size_t i = 0; i < width; ++i)
            s.bits_.push_back((value >> (width - 1 - i)) & 1);
        return s;
    }

    static BitString random(size_t nbits, std::mt19937_64& rng) {
        BitString s;
        s.bits_.reserve(nbits);
        for (size_t i = 0; i < nbits; ++i) s.bits_.push_back(rng() & 1);
        return s;
    }

    size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    bool bit(size_t i) const { return bits_.at(i); }

    void push_back(bool b) { bits_.push_back(b); }

    void append(const BitString& other) {
        bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
    }

    BitString slice(size_t from, size_t len) const {
        if (from > bits_.size() || len > bits_.size() - from)
            throw std::out_of_range("BitString::slice");
        BitString s;
        s.bits_.assign(bits_.begin() + from, bits_.begin() + from + len);
        return s;
    }

    BitString prefix(size_t len) const { return slice(0, len); }

    bool is_prefix_of(const BitString& other) const {
        if (size() > other.size()) return false;
        for (size_t i = 0; i < size(); ++i)
            if (bits_[i] != other.bits_[i]) return false;
        return true;
    }

    /// Interpret the whole string as a big-endian unsigned value (≤ 64 bits).
    uint64_t to_uint() const {
        if (size() > 64) throw std::overflow_error("BitString::to_uint: too wide");
        uint64_t v = 0;
        for (bool b : bits_) v = (v << 1) | (b ? 1 : 0);
        return v;
    }

    /// Pack into bytes, zero-padding the final partial byte on the right.
    std::vector<uint8_t> to_bytes() const {
        std::vector<uint8_t> out((size() + 7) / 8, 0);
        for (size_t i = 0; i < size(); ++i)
            if (bits_[i]) out[i / 8] |= uint8_t(0x80u >> (i % 8));
        return out;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(size());
        for (bool b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    bool all_zero() const {
        for (bool b : bits_)
            if (b) return false;
        return true;
    }

    bool operator==(const BitString& o) const { return bits_ == o.bits_; }
    bool operator!=(const BitString& o) const { return !(*this == o); }

private:
    std::vector<bool> bits_;
};

inline BitString operator+(BitString a, const BitString& b) {
    a.append(b);
    return a;
}

} // namespace sctpsteg
