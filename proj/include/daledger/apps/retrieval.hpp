#pragma once

// Namespace retrieval against a block commitment.
//
// Simplistic blocks: one namespace proof against the message root.
// Probabilistic blocks: one namespace proof per original row whose root
// range covers the namespace, against the row roots; the shares are then
// parsed back into messages.

#include <optional>

#include "daledger/block.hpp"

namespace daledger::apps {

struct NamespaceResponse {
    std::vector<nmt::Message> messages;
    nmt::NamespaceProof proof;

    std::size_t leaf_bytes() const
    {
        std::size_t n = 0;
        for (const auto& m : messages) n += m.payload.size();
        return n;
    }
    std::size_t proof_bytes() const { return proof.serialized_size(); }
};

struct RowSlice {
    std::uint32_t row = 0;
    std::vector<Share> shares;
    nmt::NamespaceProof proof;

    std::size_t leaf_bytes() const
    {
        std::size_t n = 0;
        for (const auto& s : shares) n += s.serialized_size();
        return n;
    }
    std::size_t proof_bytes() const { return 4 + proof.serialized_size(); }
};

inline std::size_t inclusion_proof_bytes(const nmt::InclusionProof& p) { return nmt::kDigestSize + p.path.size() * (1 + nmt::kDigestSize); }

inline NamespaceResponse serve_namespace(const Block& blk, nmt::NamespaceId nid)
{
    NamespaceResponse resp;
    auto tree = message_tree(blk.messages);
    resp.proof = tree.prove_namespace(nid);
    if (!resp.proof.is_absence()) {
        auto first = static_cast<std::ptrdiff_t>(resp.proof.start_index);
        auto last = first + static_cast<std::ptrdiff_t>(resp.proof.paths.size());
        resp.messages.assign(blk.messages.begin() + first, blk.messages.begin() + last);
    }
    return resp;
}

/// Original rows a namespace can occupy, judged from the committed roots.
inline std::vector<std::uint32_t> candidate_rows(const std::vector<nmt::NamespacedDigest>& row_roots, std::size_t k, nmt::NamespaceId nid)
{
    std::vector<std::uint32_t> rows;
    for (std::size_t r = 0; r < k && r < row_roots.size(); ++r)
        if (row_roots[r].contains(nid)) rows.push_back(static_cast<std::uint32_t>(r));
    return rows;
}

inline std::vector<RowSlice> serve_rows(const Block& blk, nmt::NamespaceId nid)
{
    if (!blk.square) throw Error("block has no extended square");
    const auto& sq = *blk.square;
    std::vector<RowSlice> out;
    for (auto r : candidate_rows(sq.row_roots, sq.k, nid)) {
        auto line = sq.line(Axis::Row, r);
        auto tree = line_tree(line);
        RowSlice slice;
        slice.row = r;
        slice.proof = tree.prove_namespace(nid);
        if (!slice.proof.is_absence()) {
            auto first = static_cast<std::ptrdiff_t>(slice.proof.start_index);
            slice.shares.assign(line.begin() + first, line.begin() + first + static_cast<std::ptrdiff_t>(slice.proof.paths.size()));
        }
        out.push_back(std::move(slice));
    }
    return out;
}

inline std::optional<nmt::InclusionProof> serve_leaf(const Block& blk, const Hash32& leaf_hash)
{
    auto tree = message_tree(blk.messages);
    for (std::size_t i = 0; i < tree.size(); ++i) {
        if (tree.leaf(i).hash == leaf_hash) return nmt::InclusionProof{tree.leaf(i), tree.audit_path(i)};
    }
    return std::nullopt;
}

/// Verified messages, or nullopt if the response is not the complete set.
inline std::optional<std::vector<nmt::Message>> verify_namespace_response(const BlockHeader& header,
    nmt::NamespaceId nid, const NamespaceResponse& resp)
{
    if (!nmt::verify_namespace(header.m_root, nid, resp.messages, resp.proof, share_hasher())) return std::nullopt;
    return resp.messages;
}

inline std::optional<std::vector<nmt::Message>> verify_row_slices(const std::vector<nmt::NamespacedDigest>& line_roots,
    std::size_t k, nmt::NamespaceId nid, const std::vector<RowSlice>& slices)
{
    if (line_roots.size() != 4 * k) return std::nullopt;
    std::vector<nmt::NamespacedDigest> rows(line_roots.begin(), line_roots.begin() + static_cast<std::ptrdiff_t>(2 * k));
    auto expected = candidate_rows(rows, k, nid);
    if (slices.size() != expected.size()) return std::nullopt;
    std::vector<Share> shares;
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const auto& s = slices[i];
        if (s.row != expected[i]) return std::nullopt;
        std::vector<nmt::Message> leaves;
        for (const auto& sh : s.shares) leaves.push_back(nmt::Message{sh.ns, sh.data});
        if (!nmt::verify_namespace(rows[s.row], nid, leaves, s.proof, share_hasher())) return std::nullopt;
        shares.insert(shares.end(), s.shares.begin(), s.shares.end());
    }
    try {
        return parse_shares(shares);
    } catch (const MalformedShares&) {
        // Committed by the producer, so every honest peer returns the same.
        return std::vector<nmt::Message>{};
    }
}

} // namespace daledger::apps
