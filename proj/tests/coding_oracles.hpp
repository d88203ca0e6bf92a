#pragma once

// Test-only references for the erasure code. The field arithmetic here is
// bitwise carry-less multiplication, and encoding solves the Vandermonde
// system by Gaussian elimination rather than using Lagrange weights.

#include <random>
#include <vector>

#include "daledger/square.hpp"

namespace daledger::testing {

inline Byte clmul_mod(Byte a, Byte b)
{
    unsigned acc = 0;
    for (int i = 0; i < 8; ++i)
        if (b >> i & 1) acc ^= static_cast<unsigned>(a) << i;
    for (int bit = 14; bit >= 8; --bit)
        if (acc >> bit & 1) acc ^= 0x11du << (bit - 8);
    return static_cast<Byte>(acc);
}

inline Byte slow_inv(Byte a)
{
    for (unsigned b = 1; b < 256; ++b)
        if (clmul_mod(a, static_cast<Byte>(b)) == 1) return static_cast<Byte>(b);
    throw std::domain_error("no inverse");
}

inline Byte slow_pow(Byte x, std::size_t e)
{
    Byte r = 1;
    for (std::size_t i = 0; i < e; ++i) r = clmul_mod(r, x);
    return r;
}

/// Values at points k..2k-1 of the degree < k polynomial through
/// (i, data[i]) for i < k, one byte column at a time.
inline std::vector<Bytes> oracle_parity(const std::vector<Bytes>& data)
{
    std::size_t k = data.size();
    std::size_t len = data.front().size();
    std::vector<Bytes> parity(k, Bytes(len));
    for (std::size_t b = 0; b < len; ++b) {
        // Augmented Vandermonde system V a = d.
        std::vector<std::vector<Byte>> m(k, std::vector<Byte>(k + 1));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) m[i][j] = slow_pow(static_cast<Byte>(i), j);
            m[i][k] = data[i][b];
        }
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t piv = col;
            while (m[piv][col] == 0) ++piv;
            std::swap(m[piv], m[col]);
            Byte inv = slow_inv(m[col][col]);
            for (auto& v : m[col]) v = clmul_mod(v, inv);
            for (std::size_t r = 0; r < k; ++r) {
                if (r == col || m[r][col] == 0) continue;
                Byte f = m[r][col];
                for (std::size_t c = 0; c <= k; ++c) m[r][c] ^= clmul_mod(f, m[col][c]);
            }
        }
        for (std::size_t t = 0; t < k; ++t) {
            Byte x = static_cast<Byte>(k + t);
            Byte y = 0;
            for (std::size_t j = 0; j < k; ++j) y ^= clmul_mod(m[j][k], slow_pow(x, j));
            parity[t][b] = y;
        }
    }
    return parity;
}

/// Boolean fixpoint: a line with at least k known cells becomes fully known.
inline bool closure_solvable(std::vector<bool> known, std::size_t k)
{
    std::size_t w = 2 * k;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int axis = 0; axis < 2; ++axis) {
            for (std::size_t i = 0; i < w; ++i) {
                std::size_t cnt = 0;
                for (std::size_t p = 0; p < w; ++p) cnt += known[axis == 0 ? i * w + p : p * w + i];
                if (cnt >= k && cnt < w) {
                    for (std::size_t p = 0; p < w; ++p) known[axis == 0 ? i * w + p : p * w + i] = true;
                    changed = true;
                }
            }
        }
    }
    for (bool b : known)
        if (!b) return false;
    return true;
}

inline ExtendedDataSquare random_square(std::mt19937_64& rng, std::size_t k, std::size_t share_size = 24)
{
    std::vector<Share> original;
    std::vector<std::uint64_t> ns(k * k);
    for (auto& v : ns) v = 1 + rng() % 50;
    std::sort(ns.begin(), ns.end());
    for (auto v : ns) {
        Bytes chunk(share_size - kShareNamespacePrefix);
        for (auto& b : chunk) b = static_cast<Byte>(rng());
        original.push_back(make_original_share(nmt::NamespaceId{v}, chunk, share_size));
    }
    return extend_data(original, k);
}

struct ThresholdTally {
    std::size_t patterns = 0;
    std::size_t disagreements = 0;
    std::size_t recoverable = 0;
    std::size_t inexact = 0;
};

/// Random erasure patterns of random density; reconstruct must succeed
/// exactly when the closure oracle does, and then be bit-exact.
inline ThresholdTally reconstruction_threshold(std::size_t k, std::size_t patterns, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    ThresholdTally t;
    auto full = random_square(rng, k);
    std::size_t cells = full.cells.size();
    for (std::size_t p = 0; p < patterns; ++p) {
        std::size_t erase = rng() % (cells + 1);
        std::vector<std::size_t> order(cells);
        for (std::size_t i = 0; i < cells; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<bool> known(cells, true);
        auto sq = full;
        for (std::size_t i = 0; i < erase; ++i) {
            known[order[i]] = false;
            sq.cells[order[i]].reset();
        }
        bool expect = closure_solvable(known, k);
        auto res = reconstruct(sq, full.row_roots, full.col_roots);
        ++t.patterns;
        if (res.ok() != expect) ++t.disagreements;
        if (expect && res.ok()) {
            ++t.recoverable;
            if (res.square.cells != full.cells) ++t.inexact;
        }
        if (!expect && res.status == ReconstructResult::Status::RootMismatch) ++t.disagreements;
    }
    return t;
}

} // namespace daledger::testing
