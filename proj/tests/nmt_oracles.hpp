#pragma once

// Test-only oracles for the namespaced Merkle tree. The byte layout is
// rebuilt here by hand and hashed with OpenSSL so it shares no code with
// the library's hashing path.

#include <openssl/sha.h>

#include <functional>
#include <random>
#include <vector>

#include "daledger/nmt.hpp"
#include "test_util.hpp"

namespace daledger::testing {

inline std::vector<Byte> be64(std::uint64_t v)
{
    std::vector<Byte> out(8);
    for (int i = 7; i >= 0; --i) {
        out[i] = static_cast<Byte>(v & 0xff);
        v >>= 8;
    }
    return out;
}

inline void append(std::vector<Byte>& out, const std::vector<Byte>& src)
{
    for (Byte b : src) out.push_back(b);
}

inline std::vector<Byte> openssl_sha256(const std::vector<Byte>& data)
{
    std::vector<Byte> out(SHA256_DIGEST_LENGTH);
    SHA256(data.data(), data.size(), out.data());
    return out;
}

/// 48-byte serialized digest of a leaf, computed independently.
inline std::vector<Byte> oracle_leaf(std::uint64_t ns, const Bytes& payload)
{
    std::vector<Byte> pre{0x00};
    auto nsb = be64(ns);
    append(pre, nsb);
    append(pre, payload);
    auto h = openssl_sha256(pre);
    std::vector<Byte> out;
    out.reserve(48);
    for (int rep = 0; rep < 2; ++rep)
        for (Byte b : nsb) out.push_back(b);
    for (Byte b : h) out.push_back(b);
    return out;
}

inline std::uint64_t read_be64(const std::vector<Byte>& b, std::size_t off)
{
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = v << 8 | b[off + i];
    return v;
}

inline std::vector<Byte> oracle_node(const std::vector<Byte>& l, const std::vector<Byte>& r)
{
    std::vector<Byte> pre{0x01};
    append(pre, l);
    append(pre, r);
    auto h = openssl_sha256(pre);
    auto lo = be64(std::min(read_be64(l, 0), read_be64(r, 0)));
    auto hi = be64(std::max(read_be64(l, 8), read_be64(r, 8)));
    std::vector<Byte> out = lo;
    append(out, hi);
    append(out, h);
    return out;
}

/// Brute-force root: recursive split at the largest power of two below n.
inline std::vector<Byte> oracle_root(const std::vector<nmt::Message>& msgs, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 1) return oracle_leaf(msgs[lo].ns.value, msgs[lo].payload);
    std::size_t k = 1;
    while (k * 2 < hi - lo) k *= 2;
    return oracle_node(oracle_root(msgs, lo, lo + k), oracle_root(msgs, lo + k, hi));
}

inline std::vector<Byte> oracle_root(const std::vector<nmt::Message>& msgs)
{
    return oracle_root(msgs, 0, msgs.size());
}

struct CompletenessTally {
    std::size_t trees = 0;
    std::size_t presentations = 0;
    std::size_t false_accepts = 0;
    std::size_t honest_rejects = 0;
};

/// Presents every subset of the nid-leaves (with their honest audit paths)
/// and every forged absence claim. Only the complete set may verify.
inline void check_all_selections(const std::vector<nmt::Message>& leaves, nmt::NamespaceId nid,
    CompletenessTally& tally)
{
    auto tree = nmt::Tree::build(leaves);
    auto [first, last] = tree.namespace_range(nid);
    std::size_t m = last - first;

    auto honest = tree.prove_namespace(nid);
    std::vector<nmt::Message> all(leaves.begin() + first, leaves.begin() + last);
    ++tally.presentations;
    if (!nmt::verify_namespace(tree.root(), nid, all, honest)) ++tally.honest_rejects;

    for (std::uint32_t mask = 1; m > 0 && mask + 1 < (1u << m); ++mask) {
        nmt::NamespaceProof proof;
        std::vector<nmt::Message> sel;
        bool first_set = false;
        for (std::size_t j = 0; j < m; ++j) {
            if (!(mask >> j & 1)) continue;
            if (!first_set) {
                proof.start_index = first + j;
                first_set = true;
            }
            proof.paths.push_back(tree.audit_path(first + j));
            sel.push_back(leaves[first + j]);
        }
        ++tally.presentations;
        if (nmt::verify_namespace(tree.root(), nid, sel, proof)) ++tally.false_accepts;
    }

    // Claims of absence built from any leaf's path, while nid is present.
    if (m > 0) {
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            nmt::NamespaceProof forged;
            forged.start_index = i;
            forged.paths.push_back(tree.audit_path(i));
            forged.absence_leaf = tree.leaf(i);
            ++tally.presentations;
            if (nmt::verify_namespace(tree.root(), nid, {}, forged)) ++tally.false_accepts;
        }
    }
}

/// Every sorted tree of up to max_leaves leaves over namespaces 1..ns_count,
/// queried for every namespace 0..ns_count+1.
inline CompletenessTally exhaustive_completeness(std::size_t max_leaves, std::uint64_t ns_count)
{
    CompletenessTally tally;
    std::vector<std::uint64_t> seq;
    std::function<void(std::uint64_t)> rec = [&](std::uint64_t min_next) {
        if (!seq.empty()) {
            std::vector<nmt::Message> leaves;
            for (std::size_t i = 0; i < seq.size(); ++i) {
                leaves.push_back(nmt::Message{nmt::NamespaceId{seq[i]}, Bytes{static_cast<Byte>(i)}});
            }
            ++tally.trees;
            for (std::uint64_t nid = 0; nid <= ns_count + 1; ++nid) {
                check_all_selections(leaves, nmt::NamespaceId{nid}, tally);
            }
        }
        if (seq.size() == max_leaves) return;
        for (std::uint64_t v = min_next; v <= ns_count; ++v) {
            seq.push_back(v);
            rec(v);
            seq.pop_back();
        }
    };
    rec(1);
    return tally;
}

/// Random 64-leaf trees; each drops one nid leaf (or presents all) and checks
/// the verdict against the linear-scan filter of the leaf list.
inline CompletenessTally randomized_completeness(std::size_t trials, std::size_t leaves_per_tree, std::uint64_t seed)
{
    CompletenessTally tally;
    std::mt19937_64 rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        auto leaves = random_sorted_messages(rng, leaves_per_tree, 12, 8);
        auto tree = nmt::Tree::build(leaves);
        nmt::NamespaceId nid{rng() % 14};
        ++tally.trees;

        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < leaves.size(); ++i)
            if (leaves[i].ns == nid) idx.push_back(i);

        auto proof = tree.prove_namespace(nid);
        std::vector<nmt::Message> expect;
        for (auto i : idx) expect.push_back(leaves[i]);
        ++tally.presentations;
        if (!nmt::verify_namespace(tree.root(), nid, expect, proof)) ++tally.honest_rejects;

        if (idx.size() >= 1) {
            // Drop one leaf at random, keep the remaining honest paths.
            std::size_t drop = rng() % idx.size();
            nmt::NamespaceProof partial;
            std::vector<nmt::Message> sel;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                if (j == drop) continue;
                if (partial.paths.empty()) partial.start_index = idx[j];
                partial.paths.push_back(tree.audit_path(idx[j]));
                sel.push_back(leaves[idx[j]]);
            }
            ++tally.presentations;
            if (!sel.empty() && nmt::verify_namespace(tree.root(), nid, sel, partial)) ++tally.false_accepts;
            // Forged absence from a random leaf.
            std::size_t i = rng() % leaves.size();
            nmt::NamespaceProof forged;
            forged.start_index = i;
            forged.paths.push_back(tree.audit_path(i));
            forged.absence_leaf = tree.leaf(i);
            ++tally.presentations;
            if (nmt::verify_namespace(tree.root(), nid, {}, forged)) ++tally.false_accepts;
        }
    }
    return tally;
}

} // namespace daledger::testing
