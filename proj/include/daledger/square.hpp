#pragma once

// The 2k x 2k extended data square. Original shares fill the top-left
// quadrant row-major; rows are extended first, then every column.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "daledger/errors.hpp"
#include "daledger/nmt.hpp"
#include "daledger/reed_solomon.hpp"
#include "daledger/shares.hpp"

namespace daledger {

inline constexpr std::size_t kMaxSquareK = rs::GF256::kMaxPoints / 2;

enum class Axis : Byte { Row = 0, Column = 1 };

inline const char* axis_name(Axis a) { return a == Axis::Row ? "row" : "column"; }

/// Shares inside a square are bounded by the share size, not the message limit.
inline const nmt::Hasher& share_hasher()
{
    static const nmt::Hasher h(std::numeric_limits<std::size_t>::max());
    return h;
}

inline nmt::NamespacedDigest share_leaf(const Share& s) { return share_hasher().hash_leaf(s.ns, s.data); }

/// NMT root over a full line of shares. Throws OrderingViolation when the
/// namespaces along the line are out of order.
inline nmt::NamespacedDigest line_root(std::span<const Share> line)
{
    std::vector<nmt::NamespacedDigest> leaves;
    leaves.reserve(line.size());
    for (const auto& s : line) leaves.push_back(share_leaf(s));
    return nmt::Tree::from_leaf_digests(std::move(leaves)).root();
}

inline nmt::Tree line_tree(std::span<const Share> line)
{
    std::vector<nmt::NamespacedDigest> leaves;
    leaves.reserve(line.size());
    for (const auto& s : line) leaves.push_back(share_leaf(s));
    return nmt::Tree::from_leaf_digests(std::move(leaves));
}

/// Parity half of a line, given its first k shares.
inline std::vector<Share> encode_line(const rs::LineCodec& codec, std::span<const Share> data)
{
    std::vector<BytesView> views;
    views.reserve(data.size());
    for (const auto& s : data) views.push_back(s.data);
    std::vector<Share> parity;
    for (auto& p : codec.encode(views)) parity.push_back(Share{nmt::kParityNamespace, std::move(p)});
    return parity;
}

struct ExtendedDataSquare {
    std::size_t k = 0;
    std::vector<std::optional<Share>> cells;
    std::vector<nmt::NamespacedDigest> row_roots;
    std::vector<nmt::NamespacedDigest> col_roots;

    std::size_t width() const { return 2 * k; }

    std::optional<Share>& cell(std::size_t r, std::size_t c) { return cells[r * width() + c]; }
    const std::optional<Share>& cell(std::size_t r, std::size_t c) const { return cells[r * width() + c]; }

    const std::optional<Share>& at(Axis axis, std::size_t index, std::size_t pos) const
    {
        return axis == Axis::Row ? cell(index, pos) : cell(pos, index);
    }
    std::optional<Share>& at(Axis axis, std::size_t index, std::size_t pos)
    {
        return axis == Axis::Row ? cell(index, pos) : cell(pos, index);
    }

    /// Line shares; every cell must be present.
    std::vector<Share> line(Axis axis, std::size_t index) const
    {
        std::vector<Share> out;
        out.reserve(width());
        for (std::size_t p = 0; p < width(); ++p) {
            const auto& c = at(axis, index, p);
            if (!c) throw std::logic_error("line has a missing cell");
            out.push_back(*c);
        }
        return out;
    }

    const std::vector<nmt::NamespacedDigest>& roots(Axis axis) const
    {
        return axis == Axis::Row ? row_roots : col_roots;
    }

    /// Row roots followed by column roots.
    std::vector<nmt::NamespacedDigest> line_roots() const
    {
        std::vector<nmt::NamespacedDigest> out(row_roots);
        out.insert(out.end(), col_roots.begin(), col_roots.end());
        return out;
    }

    bool complete() const
    {
        for (const auto& c : cells)
            if (!c) return false;
        return true;
    }

    /// Top-left quadrant, row-major.
    std::vector<Share> original_shares() const
    {
        std::vector<Share> out;
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c) out.push_back(cell(r, c).value());
        return out;
    }

    /// Recompute both root vectors from the current (complete) cells.
    void commit()
    {
        row_roots.clear();
        col_roots.clear();
        for (std::size_t i = 0; i < width(); ++i) row_roots.push_back(line_root(line(Axis::Row, i)));
        for (std::size_t i = 0; i < width(); ++i) col_roots.push_back(line_root(line(Axis::Column, i)));
    }
};

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// Smallest power-of-two side whose square holds share_count shares.
inline std::size_t square_side_for(std::size_t share_count)
{
    std::size_t k = 1;
    while (k * k < share_count) k *= 2;
    return k;
}

/// Extends a k x k row-major grid and commits to its rows and columns.
inline ExtendedDataSquare extend_data(std::span<const Share> original, std::size_t k)
{
    if (!is_power_of_two(k)) throw std::invalid_argument("square side must be a power of two");
    if (k > kMaxSquareK) {
        throw BlockTooLarge("square side " + std::to_string(k) + " exceeds " + std::to_string(kMaxSquareK));
    }
    if (original.size() != k * k) throw std::invalid_argument("original grid must hold k*k shares");
    std::size_t size = original.front().data.size();
    for (const auto& s : original)
        if (s.data.size() != size) throw std::invalid_argument("shares in a square must have equal size");

    rs::LineCodec codec(k);
    ExtendedDataSquare sq;
    sq.k = k;
    std::size_t w = 2 * k;
    sq.cells.assign(w * w, std::nullopt);
    for (std::size_t r = 0; r < k; ++r) {
        auto row = original.subspan(r * k, k);
        for (std::size_t c = 0; c < k; ++c) sq.cell(r, c) = row[c];
        auto parity = encode_line(codec, row);
        for (std::size_t c = 0; c < k; ++c) sq.cell(r, k + c) = std::move(parity[c]);
    }
    for (std::size_t c = 0; c < w; ++c) {
        std::vector<Share> top;
        for (std::size_t r = 0; r < k; ++r) top.push_back(*sq.cell(r, c));
        auto parity = encode_line(codec, top);
        for (std::size_t r = 0; r < k; ++r) sq.cell(k + r, c) = std::move(parity[r]);
    }
    sq.commit();
    return sq;
}

/// Splits messages into shares, pads to a power-of-two square, extends.
inline ExtendedDataSquare build_square(std::span<const nmt::Message> messages,
    std::size_t share_payload_size = kDefaultSharePayloadSize)
{
    auto shares = split_to_shares(messages, share_payload_size);
    std::size_t k = square_side_for(shares.size());
    if (k > kMaxSquareK) {
        throw BlockTooLarge(std::to_string(shares.size()) + " shares need a square side of "
            + std::to_string(k) + ", above the limit of " + std::to_string(kMaxSquareK));
    }
    while (shares.size() < k * k) shares.push_back(make_padding_share(share_payload_size));
    return extend_data(shares, k);
}

struct ReconstructResult {
    enum class Status { Ok, Unrecoverable, RootMismatch };

    Status status = Status::Ok;
    ExtendedDataSquare square;
    Axis axis = Axis::Row;
    std::size_t index = 0;

    bool ok() const { return status == Status::Ok; }
};

namespace detail {

// Completes every line with at least k known cells. Returns true if any
// cell was filled.
inline bool solve_pass(ExtendedDataSquare& sq, const rs::LineCodec& codec, Axis axis)
{
    bool progress = false;
    std::size_t w = sq.width();
    for (std::size_t i = 0; i < w; ++i) {
        std::size_t known = 0;
        for (std::size_t p = 0; p < w; ++p) known += sq.at(axis, i, p).has_value();
        if (known < sq.k || known == w) continue;
        std::vector<std::optional<Bytes>> symbols(w);
        for (std::size_t p = 0; p < w; ++p)
            if (const auto& c = sq.at(axis, i, p)) symbols[p] = c->data;
        codec.recover(symbols);
        for (std::size_t p = 0; p < w; ++p) {
            auto& c = sq.at(axis, i, p);
            if (c) continue;
            Share s;
            bool original = axis == Axis::Row ? (i < sq.k && p < sq.k) : (p < sq.k && i < sq.k);
            s.ns = original ? nmt::NamespaceId::from_bytes(BytesView(*symbols[p]).first(kShareNamespacePrefix))
                            : nmt::kParityNamespace;
            s.data = std::move(*symbols[p]);
            c = std::move(s);
            progress = true;
        }
    }
    return progress;
}

// Root of the codeword implied by the line's first k cells, or nullopt when
// its namespaces are out of order.
inline std::optional<nmt::NamespacedDigest> reencoded_root(const rs::LineCodec& codec, std::span<const Share> line)
{
    std::size_t k = codec.k();
    std::vector<Share> full(line.begin(), line.begin() + static_cast<std::ptrdiff_t>(k));
    auto parity = encode_line(codec, line.first(k));
    full.insert(full.end(), parity.begin(), parity.end());
    try {
        return line_root(full);
    } catch (const OrderingViolation&) {
        return std::nullopt;
    }
}

} // namespace detail

/// True when the line at (axis, index) does not re-encode to its root.
inline bool line_is_miscoded(const rs::LineCodec& codec, std::span<const Share> line, const nmt::NamespacedDigest& root)
{
    auto r = detail::reencoded_root(codec, line);
    return !r || *r != root;
}

/// Iterative row/column decoding to a fixpoint, then every line checked
/// against its committed root. The roots of `square` are ignored in favour
/// of the explicit commitments.
inline ReconstructResult reconstruct(ExtendedDataSquare square,
    const std::vector<nmt::NamespacedDigest>& row_roots, const std::vector<nmt::NamespacedDigest>& col_roots)
{
    if (row_roots.size() != square.width() || col_roots.size() != square.width()) {
        throw std::invalid_argument("commitment count does not match the square width");
    }
    square.row_roots = row_roots;
    square.col_roots = col_roots;
    rs::LineCodec codec(square.k);
    ReconstructResult res;
    for (;;) {
        bool a = detail::solve_pass(square, codec, Axis::Row);
        bool b = detail::solve_pass(square, codec, Axis::Column);
        if (!a && !b) break;
    }
    if (!square.complete()) {
        res.status = ReconstructResult::Status::Unrecoverable;
        res.square = std::move(square);
        return res;
    }
    for (Axis axis : {Axis::Row, Axis::Column}) {
        const auto& roots = square.roots(axis);
        for (std::size_t i = 0; i < square.width(); ++i) {
            auto line = square.line(axis, i);
            bool bad = line_is_miscoded(codec, line, roots[i]);
            if (!bad) {
                try {
                    bad = line_root(line) != roots[i];
                } catch (const OrderingViolation&) {
                    bad = true;
                }
            }
            if (bad) {
                res.status = ReconstructResult::Status::RootMismatch;
                res.axis = axis;
                res.index = i;
                res.square = std::move(square);
                return res;
            }
        }
    }
    res.square = std::move(square);
    return res;
}

} // namespace daledger
