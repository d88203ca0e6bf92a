#pragma once

// Namespaced Merkle tree: every node carries the min/max namespace of the
// leaves beneath it, which lets a verifier check that a returned set of
// leaves is the complete set for one namespace.
//
// Canonical byte layout (bit-exact):
//   NamespacedDigest  = minNs(8B BE) || maxNs(8B BE) || sha256(32B)
//   leaf preimage     = 0x00 || ns(8B BE) || payload
//   node preimage     = 0x01 || left(48B) || right(48B)

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "daledger/bytes.hpp"
#include "daledger/errors.hpp"
#include "daledger/hash.hpp"

namespace daledger::nmt {

struct NamespaceId {
    std::uint64_t value = 0;

    constexpr auto operator<=>(const NamespaceId&) const = default;

    std::array<Byte, 8> bytes() const
    {
        std::array<Byte, 8> out{};
        for (int i = 0; i < 8; ++i) out[i] = static_cast<Byte>(value >> (56 - 8 * i));
        return out;
    }

    static NamespaceId from_bytes(BytesView b)
    {
        if (b.size() != 8) throw DecodeError("namespace id must be 8 bytes");
        std::uint64_t v = 0;
        for (Byte x : b) v = v << 8 | x;
        return NamespaceId{v};
    }
};

/// Carried by every erasure-coding parity share; never valid for messages.
inline constexpr NamespaceId kParityNamespace{std::numeric_limits<std::uint64_t>::max()};

/// Reserved for padding shares and the placeholder leaf of an empty block.
/// Sorts after every application namespace and before parity.
inline constexpr NamespaceId kTailPaddingNamespace{std::numeric_limits<std::uint64_t>::max() - 1};

inline constexpr Byte kLeafTag = 0x00;
inline constexpr Byte kNodeTag = 0x01;
inline constexpr std::size_t kDigestSize = 48;
inline constexpr std::size_t kDefaultMaxLeafSize = 64 * 1024;

struct Message {
    NamespaceId ns;
    Bytes payload;

    bool operator==(const Message&) const = default;
};

struct NamespacedDigest {
    NamespaceId min_ns;
    NamespaceId max_ns;
    Hash32 hash{};

    bool operator==(const NamespacedDigest&) const = default;

    bool contains(NamespaceId nid) const { return min_ns <= nid && nid <= max_ns; }

    std::array<Byte, kDigestSize> serialize() const
    {
        std::array<Byte, kDigestSize> out{};
        auto lo = min_ns.bytes();
        auto hi = max_ns.bytes();
        std::copy(lo.begin(), lo.end(), out.begin());
        std::copy(hi.begin(), hi.end(), out.begin() + 8);
        std::copy(hash.begin(), hash.end(), out.begin() + 16);
        return out;
    }

    static NamespacedDigest deserialize(BytesView b)
    {
        if (b.size() != kDigestSize) throw DecodeError("namespaced digest must be 48 bytes");
        NamespacedDigest d;
        d.min_ns = NamespaceId::from_bytes(b.subspan(0, 8));
        d.max_ns = NamespaceId::from_bytes(b.subspan(8, 8));
        std::copy(b.begin() + 16, b.end(), d.hash.begin());
        return d;
    }
};

/// Namespaced hashing with a per-leaf size limit.
class Hasher {
public:
    Hasher() = default;
    explicit Hasher(std::size_t max_leaf_size) : max_leaf_size_(max_leaf_size) {}

    std::size_t max_leaf_size() const { return max_leaf_size_; }

    NamespacedDigest hash_leaf(NamespaceId ns, BytesView payload) const
    {
        if (payload.size() > max_leaf_size_) {
            throw OversizedLeaf("leaf payload of " + std::to_string(payload.size())
                + " bytes exceeds limit of " + std::to_string(max_leaf_size_));
        }
        auto nsb = ns.bytes();
        Sha256 h;
        h.update(kLeafTag).update(nsb).update(payload);
        return NamespacedDigest{ns, ns, h.finish()};
    }

    NamespacedDigest hash_leaf(const Message& m) const { return hash_leaf(m.ns, m.payload); }

    /// Equal namespaces across the boundary are allowed; strict inversion is not.
    static NamespacedDigest hash_node(const NamespacedDigest& left, const NamespacedDigest& right)
    {
        if (left.max_ns > right.min_ns) {
            throw OrderingViolation("left subtree max namespace exceeds right subtree min namespace");
        }
        auto l = left.serialize();
        auto r = right.serialize();
        Sha256 h;
        h.update(kNodeTag).update(l).update(r);
        return NamespacedDigest{std::min(left.min_ns, right.min_ns),
            std::max(left.max_ns, right.max_ns), h.finish()};
    }

private:
    std::size_t max_leaf_size_ = kDefaultMaxLeafSize;
};

/// Size of the left subtree for a node spanning n >= 2 leaves.
inline std::size_t split_point(std::size_t n)
{
    std::size_t k = 1;
    while (k * 2 < n) k *= 2;
    return k;
}

struct PathStep {
    NamespacedDigest sibling;
    bool sibling_on_left = false;

    bool operator==(const PathStep&) const = default;
};

/// Siblings ordered from the leaf up to the root.
using AuditPath = std::vector<PathStep>;

/// Folds a path onto a starting digest. Throws OrderingViolation when a
/// sibling pair is out of order.
inline NamespacedDigest fold_path(NamespacedDigest node, const AuditPath& path)
{
    for (const auto& step : path) {
        node = step.sibling_on_left ? Hasher::hash_node(step.sibling, node)
                                    : Hasher::hash_node(node, step.sibling);
    }
    return node;
}

inline bool path_reaches(const NamespacedDigest& leaf, const AuditPath& path, const NamespacedDigest& root)
{
    try {
        return fold_path(leaf, path) == root;
    } catch (const OrderingViolation&) {
        return false;
    }
}

/// Proof that a list of messages is the complete set for one namespace, or
/// that the namespace is absent.
struct NamespaceProof {
    static constexpr Byte kVersion = 1;

    std::vector<AuditPath> paths;
    std::uint64_t start_index = 0;
    /// Set only for absence proofs: digest of the boundary leaf.
    std::optional<NamespacedDigest> absence_leaf;

    bool is_absence() const { return absence_leaf.has_value(); }

    bool operator==(const NamespaceProof&) const = default;

    // Encoding:
    //   u8 version | u8 flags (bit0 = absence) | u64be start_index |
    //   u32be path_count | paths... | [48B absence leaf]
    //   path = u16be step_count | steps... ; step = u8 side (1 = sibling on left) | 48B digest
    Bytes serialize() const
    {
        ByteWriter w(serialized_size());
        w.u8(kVersion);
        w.u8(is_absence() ? 1 : 0);
        w.u64be(start_index);
        w.u32be(static_cast<std::uint32_t>(paths.size()));
        for (const auto& path : paths) {
            w.u16be(static_cast<std::uint16_t>(path.size()));
            for (const auto& step : path) {
                w.u8(step.sibling_on_left ? 1 : 0);
                w.raw(step.sibling.serialize());
            }
        }
        if (absence_leaf) w.raw(absence_leaf->serialize());
        return std::move(w).take();
    }

    std::size_t serialized_size() const
    {
        std::size_t n = 1 + 1 + 8 + 4;
        for (const auto& path : paths) n += 2 + path.size() * (1 + kDigestSize);
        if (absence_leaf) n += kDigestSize;
        return n;
    }

    static NamespaceProof deserialize(BytesView data)
    {
        ByteReader r(data);
        if (r.u8() != kVersion) throw DecodeError("unsupported namespace proof version");
        Byte flags = r.u8();
        if (flags > 1) throw DecodeError("unknown namespace proof flags");
        NamespaceProof p;
        p.start_index = r.u64be();
        std::uint32_t count = r.u32be();
        if (count > r.remaining()) throw DecodeError("path count exceeds input");
        p.paths.resize(count);
        for (auto& path : p.paths) {
            std::uint16_t steps = r.u16be();
            path.reserve(steps);
            for (std::uint16_t s = 0; s < steps; ++s) {
                Byte side = r.u8();
                if (side > 1) throw DecodeError("invalid path side flag");
                path.push_back(PathStep{NamespacedDigest::deserialize(r.raw(kDigestSize)), side == 1});
            }
        }
        if (flags & 1) p.absence_leaf = NamespacedDigest::deserialize(r.raw(kDigestSize));
        if (!r.empty()) throw DecodeError("trailing bytes after namespace proof");
        return p;
    }
};

/// Immutable tree over namespace-sorted leaves. The left subtree of a node
/// with n leaves holds the largest power of two strictly below n.
class Tree {
public:
    struct Node {
        std::size_t lo = 0;
        std::size_t hi = 0;
        int left = -1;
        int right = -1;
        NamespacedDigest digest;
    };

    static Tree build(std::span<const Message> messages, const Hasher& hasher = Hasher())
    {
        if (messages.empty()) throw Error("cannot build a namespaced Merkle tree with no leaves");
        for (std::size_t i = 1; i < messages.size(); ++i) {
            if (messages[i - 1].ns > messages[i].ns) {
                throw UnsortedInput("messages are not sorted by namespace at index " + std::to_string(i));
            }
        }
        std::vector<NamespacedDigest> leaves;
        leaves.reserve(messages.size());
        for (const auto& m : messages) leaves.push_back(hasher.hash_leaf(m));
        return from_leaf_digests(std::move(leaves));
    }

    static Tree from_leaf_digests(std::vector<NamespacedDigest> leaves)
    {
        if (leaves.empty()) throw Error("cannot build a namespaced Merkle tree with no leaves");
        Tree t;
        t.leaves_ = std::move(leaves);
        t.nodes_.reserve(2 * t.leaves_.size());
        t.root_ = t.build_range(0, t.leaves_.size());
        return t;
    }

    const NamespacedDigest& root() const { return nodes_[root_].digest; }
    std::size_t size() const { return leaves_.size(); }
    const NamespacedDigest& leaf(std::size_t i) const { return leaves_.at(i); }
    const std::vector<Node>& nodes() const { return nodes_; }

    AuditPath audit_path(std::size_t index) const
    {
        if (index >= leaves_.size()) throw std::out_of_range("leaf index out of range");
        AuditPath path;
        int cur = root_;
        while (nodes_[cur].left >= 0) {
            const Node& n = nodes_[cur];
            const Node& l = nodes_[n.left];
            if (index < l.hi) {
                path.push_back(PathStep{nodes_[n.right].digest, false});
                cur = n.left;
            } else {
                path.push_back(PathStep{l.digest, true});
                cur = n.right;
            }
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    /// Index range [first, last) of leaves whose namespace equals nid.
    std::pair<std::size_t, std::size_t> namespace_range(NamespaceId nid) const
    {
        auto lower = std::lower_bound(leaves_.begin(), leaves_.end(), nid,
            [](const NamespacedDigest& d, NamespaceId v) { return d.min_ns < v; });
        auto upper = std::upper_bound(lower, leaves_.end(), nid,
            [](NamespaceId v, const NamespacedDigest& d) { return v < d.min_ns; });
        return {static_cast<std::size_t>(lower - leaves_.begin()),
            static_cast<std::size_t>(upper - leaves_.begin())};
    }

    NamespaceProof prove_namespace(NamespaceId nid) const
    {
        NamespaceProof proof;
        auto [first, last] = namespace_range(nid);
        if (first < last) {
            proof.start_index = first;
            for (std::size_t i = first; i < last; ++i) proof.paths.push_back(audit_path(i));
            return proof;
        }
        // Boundary leaf: leftmost leaf above nid, or the last leaf when
        // every namespace is below nid.
        std::size_t boundary = first < leaves_.size() ? first : leaves_.size() - 1;
        proof.start_index = boundary;
        proof.paths.push_back(audit_path(boundary));
        proof.absence_leaf = leaves_[boundary];
        return proof;
    }

private:
    int build_range(std::size_t lo, std::size_t hi)
    {
        if (hi - lo == 1) {
            nodes_.push_back(Node{lo, hi, -1, -1, leaves_[lo]});
            return static_cast<int>(nodes_.size() - 1);
        }
        std::size_t mid = lo + split_point(hi - lo);
        int l = build_range(lo, mid);
        int r = build_range(mid, hi);
        auto digest = Hasher::hash_node(nodes_[l].digest, nodes_[r].digest);
        nodes_.push_back(Node{lo, hi, l, r, digest});
        return static_cast<int>(nodes_.size() - 1);
    }

    std::vector<NamespacedDigest> leaves_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

namespace detail {

// Root-to-leaf turn sequence; true = went right.
inline std::vector<bool> turns(const AuditPath& path)
{
    std::vector<bool> t;
    t.reserve(path.size());
    for (auto it = path.rbegin(); it != path.rend(); ++it) t.push_back(it->sibling_on_left);
    return t;
}

// Leaves a and b are neighbours iff their turn sequences are P,L,R...R and
// P,R,L...L for a common prefix P.
inline bool adjacent(const AuditPath& a, const AuditPath& b)
{
    auto ta = turns(a);
    auto tb = turns(b);
    std::size_t j = 0;
    while (j < ta.size() && j < tb.size() && ta[j] == tb[j]) ++j;
    if (j == ta.size() || j == tb.size()) return false;
    if (ta[j] || !tb[j]) return false;
    for (std::size_t i = j + 1; i < ta.size(); ++i)
        if (!ta[i]) return false;
    for (std::size_t i = j + 1; i < tb.size(); ++i)
        if (tb[i]) return false;
    return true;
}

inline bool left_siblings_below(const AuditPath& path, NamespaceId nid)
{
    return std::all_of(path.begin(), path.end(),
        [&](const PathStep& s) { return !s.sibling_on_left || s.sibling.max_ns < nid; });
}

inline bool right_siblings_above(const AuditPath& path, NamespaceId nid)
{
    return std::all_of(path.begin(), path.end(),
        [&](const PathStep& s) { return s.sibling_on_left || s.sibling.min_ns > nid; });
}

} // namespace detail

/// Checks that `messages` are exactly the leaves of namespace `nid` under
/// `root`. A false result means the responder misbehaved.
inline bool verify_namespace(const NamespacedDigest& root, NamespaceId nid,
    std::span<const Message> messages, const NamespaceProof& proof, const Hasher& hasher = Hasher())
{
    if (proof.paths.empty()) return false;

    if (proof.is_absence()) {
        if (!messages.empty() || proof.paths.size() != 1) return false;
        const auto& leaf = *proof.absence_leaf;
        if (leaf.min_ns != leaf.max_ns || leaf.contains(nid)) return false;
        const auto& path = proof.paths.front();
        return detail::left_siblings_below(path, nid) && detail::right_siblings_above(path, nid)
            && path_reaches(leaf, path, root);
    }

    if (messages.size() != proof.paths.size()) return false;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i].ns != nid) return false;
        NamespacedDigest leaf;
        try {
            leaf = hasher.hash_leaf(messages[i]);
        } catch (const OversizedLeaf&) {
            return false;
        }
        if (!path_reaches(leaf, proof.paths[i], root)) return false;
        if (i > 0 && !detail::adjacent(proof.paths[i - 1], proof.paths[i])) return false;
    }
    return detail::left_siblings_below(proof.paths.front(), nid)
        && detail::right_siblings_above(proof.paths.back(), nid);
}

/// Single-leaf membership proof that never reveals the leaf payload.
struct InclusionProof {
    NamespacedDigest leaf;
    AuditPath path;

    bool verify(const NamespacedDigest& root) const
    {
        return leaf.min_ns == leaf.max_ns && path_reaches(leaf, path, root);
    }
};

inline NamespacedDigest root_of(std::span<const Message> messages, const Hasher& hasher = Hasher())
{
    return Tree::build(messages, hasher).root();
}

} // namespace daledger::nmt
