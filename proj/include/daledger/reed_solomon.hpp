#pragma once

// Systematic Reed-Solomon over GF(2^8), applied independently to every byte
// position of a line. A line has 2k symbols evaluated at the field points
// 0..2k-1; symbols 0..k-1 carry data and k..2k-1 carry parity, so any k
// symbols determine the other k.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "daledger/bytes.hpp"

namespace daledger::rs {

/// GF(2^8) with the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11d).
class GF256 {
public:
    static constexpr unsigned kPoly = 0x11d;
    static constexpr std::size_t kMaxPoints = 256;

    static Byte add(Byte a, Byte b) { return a ^ b; }

    static Byte mul(Byte a, Byte b) { return tables().mul[a][b]; }

    static Byte inv(Byte a)
    {
        if (a == 0) throw std::domain_error("zero has no inverse in GF(256)");
        const auto& t = tables();
        return t.exp[255 - t.log[a]];
    }

    static Byte div(Byte a, Byte b) { return mul(a, inv(b)); }

    /// Row of the multiplication table for a fixed left operand.
    static const Byte* mul_row(Byte a) { return tables().mul[a].data(); }

private:
    struct Tables {
        std::array<Byte, 512> exp{};
        std::array<int, 256> log{};
        std::array<std::array<Byte, 256>, 256> mul{};
    };

    static const Tables& tables()
    {
        static const Tables t = [] {
            Tables t;
            unsigned x = 1;
            for (int i = 0; i < 255; ++i) {
                t.exp[i] = static_cast<Byte>(x);
                t.log[x] = i;
                x <<= 1;
                if (x & 0x100) x ^= kPoly;
            }
            for (int i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
            for (int a = 1; a < 256; ++a)
                for (int b = 1; b < 256; ++b) t.mul[a][b] = t.exp[t.log[a] + t.log[b]];
            return t;
        }();
        return t;
    }
};

/// Encoder/decoder for lines of 2k symbols, each symbol a byte buffer.
class LineCodec {
public:
    explicit LineCodec(std::size_t k) : k_(k)
    {
        if (k == 0 || 2 * k > GF256::kMaxPoints) {
            throw std::invalid_argument("line half-length must be in [1, 128]");
        }
        std::vector<std::size_t> known(k);
        for (std::size_t i = 0; i < k; ++i) known[i] = i;
        encode_matrix_.reserve(k);
        for (std::size_t t = k; t < 2 * k; ++t) encode_matrix_.push_back(lagrange_coefficients(known, t));
    }

    std::size_t k() const { return k_; }
    std::size_t length() const { return 2 * k_; }

    /// Parity symbols for k data symbols of equal length.
    std::vector<Bytes> encode(std::span<const BytesView> data) const
    {
        if (data.size() != k_) throw std::invalid_argument("encode expects exactly k data symbols");
        std::size_t len = symbol_length(data);
        std::vector<Bytes> parity(k_, Bytes(len, 0));
        for (std::size_t t = 0; t < k_; ++t) combine(encode_matrix_[t], data, parity[t]);
        return parity;
    }

    /// Fills every missing symbol from any k present ones. Returns false when
    /// fewer than k symbols are present.
    bool recover(std::vector<std::optional<Bytes>>& line) const
    {
        if (line.size() != length()) throw std::invalid_argument("line has wrong length");
        std::vector<std::size_t> known;
        std::vector<BytesView> views;
        for (std::size_t i = 0; i < line.size() && known.size() < k_; ++i) {
            if (line[i]) {
                known.push_back(i);
                views.push_back(*line[i]);
            }
        }
        if (known.size() < k_) return false;
        std::size_t len = symbol_length(views);
        for (std::size_t t = 0; t < line.size(); ++t) {
            if (line[t]) continue;
            Bytes out(len, 0);
            combine(lagrange_coefficients(known, t), views, out);
            line[t] = std::move(out);
        }
        return true;
    }

    /// Weights w_i with P(target) = sum_i w_i * P(known_i) for every
    /// polynomial P of degree below known.size().
    static std::vector<Byte> lagrange_coefficients(std::span<const std::size_t> known, std::size_t target)
    {
        std::vector<Byte> coef(known.size());
        Byte x = static_cast<Byte>(target);
        for (std::size_t i = 0; i < known.size(); ++i) {
            Byte xi = static_cast<Byte>(known[i]);
            Byte num = 1;
            Byte den = 1;
            for (std::size_t j = 0; j < known.size(); ++j) {
                if (j == i) continue;
                Byte xj = static_cast<Byte>(known[j]);
                num = GF256::mul(num, GF256::add(x, xj));
                den = GF256::mul(den, GF256::add(xi, xj));
            }
            coef[i] = GF256::div(num, den);
        }
        return coef;
    }

private:
    static std::size_t symbol_length(std::span<const BytesView> symbols)
    {
        std::size_t len = symbols.empty() ? 0 : symbols.front().size();
        for (auto s : symbols)
            if (s.size() != len) throw std::invalid_argument("symbols must have equal length");
        return len;
    }

    static void combine(const std::vector<Byte>& coef, std::span<const BytesView> symbols, Bytes& out)
    {
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (coef[i] == 0) continue;
            const Byte* row = GF256::mul_row(coef[i]);
            const Byte* src = symbols[i].data();
            Byte* dst = out.data();
            for (std::size_t b = 0; b < out.size(); ++b) dst[b] ^= row[src[b]];
        }
    }

    std::size_t k_;
    std::vector<std::vector<Byte>> encode_matrix_;
};

} // namespace daledger::rs
