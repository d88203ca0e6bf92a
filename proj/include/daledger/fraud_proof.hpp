#pragma once

// Erasure-coding fraud proofs.
//
// Wire format (version 1, big-endian):
//   u8 version | u8 axis | u32 index | u32 width | u32 share_size
//   width x { u64 ns | share_size bytes data | log2(width) x 48B sibling }
// Sibling sides follow from the line index, which is the leaf position in
// every orthogonal tree, so no side flags are sent.

#include <string>
#include <vector>

#include "daledger/square.hpp"

namespace daledger {

struct CodingFraudProof {
    static constexpr Byte kVersion = 1;

    Axis axis = Axis::Row;
    std::uint32_t index = 0;
    std::vector<Share> shares;
    std::vector<nmt::AuditPath> paths;

    std::size_t width() const { return shares.size(); }

    std::size_t serialized_size() const
    {
        std::size_t n = 1 + 1 + 4 + 4 + 4;
        for (std::size_t i = 0; i < shares.size(); ++i) {
            n += 8 + shares[i].data.size() + paths[i].size() * nmt::kDigestSize;
        }
        return n;
    }

    Bytes serialize() const
    {
        if (paths.size() != shares.size()) throw std::logic_error("fraud proof needs one path per share");
        std::size_t share_size = shares.empty() ? 0 : shares.front().data.size();
        std::size_t depth = paths.empty() ? 0 : paths.front().size();
        ByteWriter w(serialized_size());
        w.u8(kVersion);
        w.u8(static_cast<Byte>(axis));
        w.u32be(index);
        w.u32be(static_cast<std::uint32_t>(shares.size()));
        w.u32be(static_cast<std::uint32_t>(share_size));
        for (std::size_t i = 0; i < shares.size(); ++i) {
            if (shares[i].data.size() != share_size || paths[i].size() != depth) {
                throw std::logic_error("fraud proof shares and paths must be uniform");
            }
            w.u64be(shares[i].ns.value);
            w.raw(shares[i].data);
            for (const auto& step : paths[i]) w.raw(step.sibling.serialize());
        }
        return std::move(w).take();
    }

    static CodingFraudProof deserialize(BytesView data)
    {
        ByteReader r(data);
        if (r.u8() != kVersion) throw DecodeError("unsupported fraud proof version");
        CodingFraudProof p;
        Byte axis = r.u8();
        if (axis > 1) throw DecodeError("fraud proof axis must be 0 or 1");
        p.axis = static_cast<Axis>(axis);
        p.index = r.u32be();
        std::uint32_t width = r.u32be();
        std::uint32_t share_size = r.u32be();
        if (width < 2 || !is_power_of_two(width) || width > 2 * kMaxSquareK) {
            throw DecodeError("fraud proof width must be a power of two in [2, 256]");
        }
        if (p.index >= width) throw DecodeError("fraud proof index outside the square");
        std::size_t depth = 0;
        while ((std::size_t{1} << depth) < width) ++depth;
        std::size_t per_share = 8 + std::size_t{share_size} + depth * nmt::kDigestSize;
        if (r.remaining() != per_share * width) throw DecodeError("fraud proof length does not match its header");
        for (std::uint32_t i = 0; i < width; ++i) {
            Share s;
            s.ns = nmt::NamespaceId{r.u64be()};
            auto d = r.raw(share_size);
            s.data.assign(d.begin(), d.end());
            nmt::AuditPath path;
            for (std::size_t j = 0; j < depth; ++j) {
                path.push_back(nmt::PathStep{nmt::NamespacedDigest::deserialize(r.raw(nmt::kDigestSize)),
                    ((p.index >> j) & 1) != 0});
            }
            p.shares.push_back(std::move(s));
            p.paths.push_back(std::move(path));
        }
        return p;
    }
};

namespace detail {

// Folds a path whose sides are dictated by the leaf position.
inline bool reaches_at(const nmt::NamespacedDigest& leaf, const nmt::AuditPath& path, std::size_t position,
    std::size_t width, const nmt::NamespacedDigest& root)
{
    if ((std::size_t{1} << path.size()) != width) return false;
    nmt::AuditPath sided = path;
    for (std::size_t j = 0; j < sided.size(); ++j) sided[j].sibling_on_left = ((position >> j) & 1) != 0;
    return nmt::path_reaches(leaf, sided, root);
}

// Proof for a line without checking that it is actually fraudulent.
inline CodingFraudProof assemble_fraud_proof(const ExtendedDataSquare& square, Axis axis, std::size_t index)
{
    CodingFraudProof p;
    p.axis = axis;
    p.index = static_cast<std::uint32_t>(index);
    Axis other = axis == Axis::Row ? Axis::Column : Axis::Row;
    for (std::size_t j = 0; j < square.width(); ++j) {
        auto tree = line_tree(square.line(other, j));
        p.shares.push_back(*square.at(axis, index, j));
        p.paths.push_back(tree.audit_path(index));
    }
    return p;
}

} // namespace detail

/// True iff every share authenticates against its orthogonal root and the
/// line re-encoded from its first half misses the committed line root.
inline bool verify_coding_fraud_proof(const std::vector<nmt::NamespacedDigest>& row_roots,
    const std::vector<nmt::NamespacedDigest>& col_roots, const CodingFraudProof& proof)
{
    std::size_t w = row_roots.size();
    if (w < 2 || !is_power_of_two(w) || w > 2 * kMaxSquareK || col_roots.size() != w) return false;
    if (proof.index >= w || proof.shares.size() != w || proof.paths.size() != w) return false;
    std::size_t size = proof.shares.front().data.size();
    const auto& line_roots = proof.axis == Axis::Row ? row_roots : col_roots;
    const auto& orth_roots = proof.axis == Axis::Row ? col_roots : row_roots;
    for (std::size_t j = 0; j < w; ++j) {
        const Share& s = proof.shares[j];
        if (s.data.size() != size) return false;
        if (!detail::reaches_at(share_leaf(s), proof.paths[j], proof.index, w, orth_roots[j])) return false;
    }
    rs::LineCodec codec(w / 2);
    return line_is_miscoded(codec, proof.shares, line_roots[proof.index]);
}

/// Throws NotFraudulent if the line is correctly coded.
inline CodingFraudProof gen_coding_fraud_proof(const ExtendedDataSquare& square, Axis axis, std::size_t index)
{
    if (index >= square.width()) throw std::out_of_range("line index outside the square");
    rs::LineCodec codec(square.k);
    auto line = square.line(axis, index);
    if (!line_is_miscoded(codec, line, square.roots(axis)[index])) {
        throw NotFraudulent(std::string(axis_name(axis)) + " " + std::to_string(index) + " is correctly coded");
    }
    return detail::assemble_fraud_proof(square, axis, index);
}

/// First line of a complete square for which a verifiable fraud proof exists.
inline std::optional<CodingFraudProof> find_coding_fraud(const ExtendedDataSquare& square)
{
    rs::LineCodec codec(square.k);
    for (Axis axis : {Axis::Row, Axis::Column}) {
        for (std::size_t i = 0; i < square.width(); ++i) {
            if (!line_is_miscoded(codec, square.line(axis, i), square.roots(axis)[i])) continue;
            try {
                auto p = detail::assemble_fraud_proof(square, axis, i);
                if (verify_coding_fraud_proof(square.row_roots, square.col_roots, p)) return p;
            } catch (const OrderingViolation&) {
                // An orthogonal line is itself unordered; try the next line.
            }
        }
    }
    return std::nullopt;
}

} // namespace daledger
