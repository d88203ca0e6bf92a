#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace daledger {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;
using BytesView = std::span<const Byte>;
using Hash32 = std::array<Byte, 32>;

/// Raised by ByteReader when the input ends early or a field is malformed.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_hex(BytesView data)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (Byte b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

inline Bytes from_hex(std::string_view hex)
{
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw DecodeError("invalid hex digit");
    };
    if (hex.size() % 2 != 0) throw DecodeError("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<Byte>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    }
    return out;
}

/// Number of bytes an unsigned LEB128 varint occupies.
inline std::size_t varint_size(std::uint64_t v)
{
    std::size_t n = 1;
    while (v >= 0x80) {
        v >>= 7;
        ++n;
    }
    return n;
}

/// Append-only encoder. Big-endian helpers are used for hashed/canonical
/// fields; little-endian helpers for archive framing.
class ByteWriter {
public:
    ByteWriter() = default;
    explicit ByteWriter(std::size_t reserve) { buf_.reserve(reserve); }

    void u8(Byte v) { buf_.push_back(v); }

    void u16be(std::uint16_t v)
    {
        buf_.push_back(static_cast<Byte>(v >> 8));
        buf_.push_back(static_cast<Byte>(v));
    }

    void u32be(std::uint32_t v)
    {
        for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<Byte>(v >> s));
    }

    void u64be(std::uint64_t v)
    {
        for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<Byte>(v >> s));
    }

    void u32le(std::uint32_t v)
    {
        for (int s = 0; s < 32; s += 8) buf_.push_back(static_cast<Byte>(v >> s));
    }

    void varint(std::uint64_t v)
    {
        while (v >= 0x80) {
            buf_.push_back(static_cast<Byte>(v | 0x80));
            v >>= 7;
        }
        buf_.push_back(static_cast<Byte>(v));
    }

    void raw(BytesView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    /// u32le length followed by the bytes.
    void blob_le(BytesView data)
    {
        u32le(static_cast<std::uint32_t>(data.size()));
        raw(data);
    }

    std::size_t size() const { return buf_.size(); }
    const Bytes& bytes() const& { return buf_; }
    Bytes take() && { return std::move(buf_); }

private:
    Bytes buf_;
};

class ByteReader {
public:
    explicit ByteReader(BytesView data) : data_(data) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    bool empty() const { return remaining() == 0; }
    std::size_t position() const { return pos_; }

    Byte u8()
    {
        need(1);
        return data_[pos_++];
    }

    std::uint16_t u16be()
    {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32be()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
        return v;
    }

    std::uint64_t u64be()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_++];
        return v;
    }

    std::uint32_t u32le()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }

    std::uint64_t varint()
    {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            Byte b = u8();
            v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
            if ((b & 0x80) == 0) return v;
        }
        throw DecodeError("varint too long");
    }

    BytesView raw(std::size_t n)
    {
        need(n);
        BytesView out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    template <std::size_t N>
    std::array<Byte, N> fixed()
    {
        std::array<Byte, N> out{};
        auto src = raw(N);
        std::copy(src.begin(), src.end(), out.begin());
        return out;
    }

    Bytes blob_le()
    {
        std::uint32_t n = u32le();
        auto v = raw(n);
        return Bytes(v.begin(), v.end());
    }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n) throw DecodeError("unexpected end of input");
    }

    BytesView data_;
    std::size_t pos_ = 0;
};

} // namespace daledger
