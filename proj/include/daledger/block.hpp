#pragma once

// Headers, blocks, the two validity rules and a longest-valid-chain view.
//
// Canonical header (125 bytes, big-endian), the preimage of its hash:
//   prevHash(32) | height u64 | mode u8 | mRoot(48) | availabilityRoot(32) | k u32
// availabilityRoot and k are zero in simplistic mode.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "daledger/fraud_proof.hpp"
#include "daledger/hash.hpp"
#include "daledger/nmt.hpp"
#include "daledger/sampler.hpp"
#include "daledger/square.hpp"

namespace daledger {

enum class ValidityMode : Byte { Simplistic = 0, Probabilistic = 1 };

inline const char* mode_name(ValidityMode m) { return m == ValidityMode::Simplistic ? "simplistic" : "probabilistic"; }

/// Plain binary Merkle root over the serialized line roots
/// (leaf = H(0x00 || digest48), node = H(0x01 || l || r)).
inline Hash32 availability_root(std::span<const nmt::NamespacedDigest> line_roots)
{
    if (line_roots.empty()) return Hash32{};
    std::vector<Hash32> level;
    for (const auto& d : line_roots) {
        auto b = d.serialize();
        Byte tag = 0x00;
        level.push_back(sha256({BytesView(&tag, 1), BytesView(b)}));
    }
    while (level.size() > 1) {
        std::vector<Hash32> next;
        for (std::size_t i = 0; i < level.size(); i += 2) {
            if (i + 1 == level.size()) {
                next.push_back(level[i]);
                continue;
            }
            Byte tag = 0x01;
            next.push_back(sha256({BytesView(&tag, 1), BytesView(level[i]), BytesView(level[i + 1])}));
        }
        level = std::move(next);
    }
    return level.front();
}

struct BlockHeader {
    static constexpr std::size_t kEncodedSize = 32 + 8 + 1 + nmt::kDigestSize + 32 + 4;

    Hash32 prev_hash{};
    std::uint64_t height = 0;
    ValidityMode mode = ValidityMode::Simplistic;
    nmt::NamespacedDigest m_root;
    Hash32 availability_root{};
    std::uint32_t k = 0;

    bool operator==(const BlockHeader&) const = default;

    Bytes encode() const
    {
        ByteWriter w(kEncodedSize);
        w.raw(prev_hash);
        w.u64be(height);
        w.u8(static_cast<Byte>(mode));
        w.raw(m_root.serialize());
        w.raw(availability_root);
        w.u32be(k);
        return std::move(w).take();
    }

    static BlockHeader decode(BytesView b)
    {
        if (b.size() != kEncodedSize) throw DecodeError("header must be " + std::to_string(kEncodedSize) + " bytes");
        ByteReader r(b);
        BlockHeader h;
        h.prev_hash = r.fixed<32>();
        h.height = r.u64be();
        Byte mode = r.u8();
        if (mode > 1) throw DecodeError("unknown validity mode");
        h.mode = static_cast<ValidityMode>(mode);
        h.m_root = nmt::NamespacedDigest::deserialize(r.raw(nmt::kDigestSize));
        h.availability_root = r.fixed<32>();
        h.k = r.u32be();
        return h;
    }

    Hash32 hash() const { return sha256(encode()); }
};

/// Placeholder leaf of an empty block, so the message root is total.
inline nmt::Message empty_block_leaf() { return nmt::Message{nmt::kTailPaddingNamespace, {}}; }

inline nmt::NamespacedDigest message_root(std::span<const nmt::Message> messages, const nmt::Hasher& hasher)
{
    if (messages.empty()) {
        auto leaf = empty_block_leaf();
        return nmt::root_of(std::span<const nmt::Message>(&leaf, 1), hasher);
    }
    return nmt::root_of(messages, hasher);
}

/// Message tree of a block, including the empty-block placeholder.
inline nmt::Tree message_tree(std::span<const nmt::Message> messages,
    const nmt::Hasher& hasher = nmt::Hasher(std::numeric_limits<std::size_t>::max()))
{
    if (messages.empty()) {
        auto leaf = empty_block_leaf();
        return nmt::Tree::build(std::span<const nmt::Message>(&leaf, 1), hasher);
    }
    return nmt::Tree::build(messages, hasher);
}

inline BlockHeader genesis_header()
{
    BlockHeader g;
    g.m_root = message_root({}, nmt::Hasher());
    return g;
}

struct Block {
    BlockHeader header;
    std::vector<nmt::Message> messages;
    std::optional<ExtendedDataSquare> square;
    std::size_t share_payload_size = kDefaultSharePayloadSize;

    /// header | u32 share size | u32 count | (u64 ns | u32 len | payload)*
    /// The square is rebuilt from the messages on decode.
    Bytes encode() const
    {
        ByteWriter w;
        w.raw(header.encode());
        w.u32be(static_cast<std::uint32_t>(share_payload_size));
        w.u32be(static_cast<std::uint32_t>(messages.size()));
        for (const auto& m : messages) {
            w.u64be(m.ns.value);
            w.u32be(static_cast<std::uint32_t>(m.payload.size()));
            w.raw(m.payload);
        }
        return std::move(w).take();
    }

    static Block decode(BytesView b)
    {
        ByteReader r(b);
        Block blk;
        blk.header = BlockHeader::decode(r.raw(BlockHeader::kEncodedSize));
        blk.share_payload_size = r.u32be();
        std::uint32_t count = r.u32be();
        for (std::uint32_t i = 0; i < count; ++i) {
            nmt::Message m;
            m.ns = nmt::NamespaceId{r.u64be()};
            std::uint32_t len = r.u32be();
            auto p = r.raw(len);
            m.payload.assign(p.begin(), p.end());
            blk.messages.push_back(std::move(m));
        }
        if (!r.empty()) throw DecodeError("trailing bytes after block");
        if (blk.header.mode == ValidityMode::Probabilistic) {
            blk.square = build_square(blk.messages, blk.share_payload_size);
        }
        return blk;
    }

    /// Total size of the message payload bytes.
    std::size_t data_size() const
    {
        std::size_t n = 0;
        for (const auto& m : messages) n += m.payload.size();
        return n;
    }
};

inline bool reserved_namespace(nmt::NamespaceId ns)
{
    return ns == nmt::kParityNamespace || ns == nmt::kTailPaddingNamespace;
}

inline Block make_block(const BlockHeader& prev, std::vector<nmt::Message> messages, ValidityMode mode,
    std::size_t max_leaf_size = nmt::kDefaultMaxLeafSize, std::size_t share_payload_size = kDefaultSharePayloadSize)
{
    for (const auto& m : messages) {
        if (reserved_namespace(m.ns)) throw Error("message uses a reserved namespace");
    }
    std::stable_sort(messages.begin(), messages.end(),
        [](const nmt::Message& a, const nmt::Message& b) { return a.ns < b.ns; });
    nmt::Hasher hasher(max_leaf_size);
    Block blk;
    blk.header.prev_hash = prev.hash();
    blk.header.height = prev.height + 1;
    blk.header.mode = mode;
    blk.header.m_root = message_root(messages, hasher);
    blk.share_payload_size = share_payload_size;
    if (mode == ValidityMode::Probabilistic) {
        blk.square = build_square(messages, share_payload_size);
        blk.header.k = static_cast<std::uint32_t>(blk.square->k);
        blk.header.availability_root = availability_root(blk.square->line_roots());
    }
    blk.messages = std::move(messages);
    return blk;
}

/// Full message list, or nullopt when the fetch timed out.
using FetchMessages = std::function<std::optional<std::vector<nmt::Message>>()>;

/// Simplistic rule: download everything and recompute the root.
inline bool block_valid_simplistic(const BlockHeader& header, const FetchMessages& fetch,
    std::size_t max_leaf_size = nmt::kDefaultMaxLeafSize)
{
    auto data = fetch();
    if (!data) return false;
    try {
        return message_root(*data, nmt::Hasher(max_leaf_size)) == header.m_root;
    } catch (const Error&) {
        return false;
    }
}

struct CellIndex {
    std::size_t row = 0;
    std::size_t col = 0;

    auto operator<=>(const CellIndex&) const = default;
};

/// A share plus its path inside the row tree.
struct SampleResponse {
    Share share;
    nmt::AuditPath path;

    std::size_t serialized_size() const { return share.serialized_size() + path.size() * nmt::kDigestSize; }
};

inline bool verify_sample(const std::vector<nmt::NamespacedDigest>& row_roots, CellIndex at, const SampleResponse& resp)
{
    if (at.row >= row_roots.size() || at.col >= row_roots.size()) return false;
    return detail::reaches_at(share_leaf(resp.share), resp.path, at.col, row_roots.size(), row_roots[at.row]);
}

inline SampleResponse answer_sample(const ExtendedDataSquare& sq, CellIndex at)
{
    auto tree = line_tree(sq.line(Axis::Row, at.row));
    return SampleResponse{*sq.cell(at.row, at.col), tree.audit_path(at.col)};
}

/// Cells a sampler asks for: s distinct positions of the 2k x 2k square.
template <class Rng>
std::vector<CellIndex> draw_cells(Rng& rng, std::size_t k, std::size_t s)
{
    std::size_t w = 2 * k;
    std::vector<CellIndex> out;
    for (auto p : sampler::draw_samples(rng, w * w, std::min(s, w * w))) out.push_back(CellIndex{p / w, p % w});
    return out;
}

using FetchSample = std::function<std::optional<SampleResponse>(CellIndex)>;

inline bool line_roots_match(const BlockHeader& header, const std::vector<nmt::NamespacedDigest>& line_roots)
{
    return header.mode == ValidityMode::Probabilistic && header.k >= 1 && line_roots.size() == 4 * std::size_t{header.k}
        && availability_root(line_roots) == header.availability_root;
}

/// Probabilistic rule: every sample answered and verified, and no known
/// valid fraud proof for this header.
inline bool block_valid_probabilistic(const BlockHeader& header, const std::vector<nmt::NamespacedDigest>& line_roots,
    std::span<const CellIndex> samples, const FetchSample& fetch, std::span<const CodingFraudProof> fraud_inbox)
{
    if (!line_roots_match(header, line_roots)) return false;
    std::size_t w = 2 * std::size_t{header.k};
    std::vector<nmt::NamespacedDigest> rows(line_roots.begin(), line_roots.begin() + static_cast<std::ptrdiff_t>(w));
    std::vector<nmt::NamespacedDigest> cols(line_roots.begin() + static_cast<std::ptrdiff_t>(w), line_roots.end());
    for (const auto& proof : fraud_inbox) {
        if (verify_coding_fraud_proof(rows, cols, proof)) return false;
    }
    for (auto at : samples) {
        auto resp = fetch(at);
        if (!resp || !verify_sample(rows, at, *resp)) return false;
    }
    return true;
}

/// Observed headers with their validity verdicts.
class ChainView {
public:
    void add(const BlockHeader& h, bool valid)
    {
        auto id = h.hash();
        entries_[id] = Entry{h, valid};
    }

    bool contains(const Hash32& id) const { return entries_.count(id) != 0; }
    std::size_t size() const { return entries_.size(); }

    /// Deepest header whose entire ancestry back to genesis is present and
    /// valid; ties go to the lexicographically smallest hash.
    std::optional<Hash32> best_tip() const
    {
        std::optional<Hash32> best;
        std::uint64_t best_height = 0;
        for (const auto& [id, e] : entries_) {
            if (!valid_ancestry(id)) continue;
            if (!best || e.header.height > best_height || (e.header.height == best_height && id < *best)) {
                best = id;
                best_height = e.header.height;
            }
        }
        return best;
    }

    bool in_chain(const BlockHeader& h) const
    {
        auto tip = best_tip();
        if (!tip) return false;
        auto target = h.hash();
        std::optional<Hash32> cur = tip;
        while (cur) {
            if (*cur == target) return true;
            auto it = entries_.find(*cur);
            if (it == entries_.end() || it->second.header.height == 0) break;
            cur = it->second.header.prev_hash;
        }
        return false;
    }

    bool valid(const Hash32& id) const
    {
        auto it = entries_.find(id);
        return it != entries_.end() && it->second.valid;
    }

private:
    struct Entry {
        BlockHeader header;
        bool valid = false;
    };

    bool valid_ancestry(Hash32 id) const
    {
        for (;;) {
            auto it = entries_.find(id);
            if (it == entries_.end() || !it->second.valid) return false;
            const auto& h = it->second.header;
            if (h.height == 0) return true;
            auto parent = entries_.find(h.prev_hash);
            if (parent == entries_.end() || parent->second.header.height + 1 != h.height) return false;
            id = h.prev_hash;
        }
    }

    std::map<Hash32, Entry> entries_;
};

inline bool in_chain(const BlockHeader& h, const ChainView& view) { return view.in_chain(h); }

/// u32le-length-prefixed canonical blocks.
inline void write_archive(const std::filesystem::path& path, std::span<const Block> blocks)
{
    ByteWriter w;
    for (const auto& b : blocks) w.blob_le(b.encode());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

inline std::vector<Block> read_archive(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(data);
    std::vector<Block> out;
    while (!r.empty()) out.push_back(Block::decode(r.blob_le()));
    return out;
}

} // namespace daledger
