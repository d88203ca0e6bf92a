#pragma once

// Client-side state sync over untrusted storage peers, and the full-block
// replay it must agree with.

#include <memory>

#include "daledger/apps/retrieval.hpp"
#include "daledger/apps/state.hpp"

namespace daledger::apps {

/// Header plus the line roots the client checked it against (empty for
/// simplistic blocks).
struct AcceptedBlock {
    BlockHeader header;
    std::vector<nmt::NamespacedDigest> line_roots;

    static AcceptedBlock of(const Block& b)
    {
        return AcceptedBlock{b.header, b.square ? b.square->line_roots() : std::vector<nmt::NamespacedDigest>{}};
    }
};

class StoragePeer {
public:
    virtual ~StoragePeer() = default;
    virtual std::optional<NamespaceResponse> query(const BlockHeader& h, nmt::NamespaceId nid) = 0;
    virtual std::optional<std::vector<RowSlice>> query_rows(const BlockHeader& h, nmt::NamespaceId nid) = 0;
    virtual std::optional<nmt::InclusionProof> leaf_proof(const BlockHeader& h, const Hash32& leaf_hash) = 0;
};

/// Honest peer holding full blocks.
class ArchivePeer : public StoragePeer {
public:
    void add(std::shared_ptr<const Block> b) { blocks_[b->header.hash()] = std::move(b); }
    void add(const Block& b) { add(std::make_shared<const Block>(b)); }

    const Block* find(const BlockHeader& h) const
    {
        auto it = blocks_.find(h.hash());
        return it == blocks_.end() ? nullptr : it->second.get();
    }

    std::optional<NamespaceResponse> query(const BlockHeader& h, nmt::NamespaceId nid) override
    {
        auto b = find(h);
        if (!b) return std::nullopt;
        return serve_namespace(*b, nid);
    }

    std::optional<std::vector<RowSlice>> query_rows(const BlockHeader& h, nmt::NamespaceId nid) override
    {
        auto b = find(h);
        if (!b || !b->square) return std::nullopt;
        return serve_rows(*b, nid);
    }

    std::optional<nmt::InclusionProof> leaf_proof(const BlockHeader& h, const Hash32& leaf_hash) override
    {
        auto b = find(h);
        if (!b) return std::nullopt;
        return serve_leaf(*b, leaf_hash);
    }

private:
    std::map<Hash32, std::shared_ptr<const Block>> blocks_;
};

/// Drops the last message of an answer, keeping the rest of the honest proof.
inline void omit_last(NamespaceResponse& r)
{
    if (r.messages.empty()) return;
    r.messages.pop_back();
    r.proof.paths.pop_back();
}

inline void omit_last(std::vector<RowSlice>& slices)
{
    for (auto it = slices.rbegin(); it != slices.rend(); ++it) {
        if (it->shares.empty()) continue;
        it->shares.pop_back();
        it->proof.paths.pop_back();
        return;
    }
}

/// Archive that withholds the last message (or share) of one namespace.
class OmittingPeer : public ArchivePeer {
public:
    explicit OmittingPeer(nmt::NamespaceId target) : target_(target) {}

    std::optional<NamespaceResponse> query(const BlockHeader& h, nmt::NamespaceId nid) override
    {
        auto r = ArchivePeer::query(h, nid);
        if (r && nid == target_) omit_last(*r);
        return r;
    }

    std::optional<std::vector<RowSlice>> query_rows(const BlockHeader& h, nmt::NamespaceId nid) override
    {
        auto r = ArchivePeer::query_rows(h, nid);
        if (r && nid == target_) omit_last(*r);
        return r;
    }

private:
    nmt::NamespaceId target_;
};

using LeafLookup = std::function<std::optional<nmt::InclusionProof>(const Hash32&)>;

/// Applies one block's messages to `states` for the namespaces in `order`
/// (dependencies first), in leaf order.
inline void apply_block(const AppRegistry& registry, std::span<const nmt::NamespaceId> order,
    std::map<nmt::NamespaceId, AppState>& states, const BlockHeader& header,
    const std::map<nmt::NamespaceId, std::vector<nmt::Message>>& messages, const LeafLookup& leaf_proof)
{
    for (auto ns : order) {
        const auto& app = registry.at(ns);
        BlockContext ctx;
        ctx.height = header.height;
        ctx.m_root = header.m_root;
        ctx.leaf_proof = leaf_proof;
        for (auto d : app.dependencies) ctx.deps[d] = &states.at(d);
        auto it = messages.find(ns);
        if (it == messages.end()) continue;
        auto& state = states.at(ns);
        for (const auto& m : it->second) app.transition(state, m, ctx);
    }
}

/// Bytes a client pulled off the wire, by kind.
struct DownloadStats {
    std::map<nmt::NamespaceId, std::size_t> leaf_bytes;
    std::size_t proof_bytes = 0;
    std::size_t rejected_responses = 0;

    std::size_t total_leaf_bytes() const
    {
        std::size_t n = 0;
        for (const auto& [ns, b] : leaf_bytes) n += b;
        return n;
    }
    std::size_t total() const { return total_leaf_bytes() + proof_bytes; }
};

class AppClient {
public:
    AppClient(const AppRegistry& registry, nmt::NamespaceId app)
        : registry_(&registry), app_(app), order_(registry.closure(app))
    {
        for (auto ns : order_) states_[ns] = registry.at(ns).genesis;
    }

    nmt::NamespaceId app() const { return app_; }
    const std::vector<nmt::NamespaceId>& namespaces() const { return order_; }
    const AppState& state() const { return states_.at(app_); }
    const AppState& state(nmt::NamespaceId ns) const { return states_.at(ns); }
    const DownloadStats& stats() const { return stats_; }
    std::uint64_t height() const { return height_; }

    /// Fetches and applies one block, trying peers in order and moving on
    /// after any incomplete answer. Throws PeerMisbehavior if none served it.
    void sync_block(const AcceptedBlock& blk, std::span<StoragePeer* const> peers)
    {
        if (blk.header.height <= height_) throw Error("blocks must be synced in increasing height order");
        std::optional<std::map<nmt::NamespaceId, std::vector<nmt::Message>>> fetched;
        for (auto* peer : peers) {
            try {
                fetched = fetch(blk, *peer);
                break;
            } catch (const PeerMisbehavior&) {
                ++stats_.rejected_responses;
            }
        }
        if (!fetched) throw PeerMisbehavior("no peer returned complete namespace data at height " + std::to_string(blk.header.height));
        LeafLookup lookup = [&](const Hash32& h) -> std::optional<nmt::InclusionProof> {
            for (auto* peer : peers) {
                auto p = peer->leaf_proof(blk.header, h);
                if (!p) continue;
                stats_.proof_bytes += inclusion_proof_bytes(*p);
                if (p->leaf.hash == h && p->verify(blk.header.m_root)) return p;
            }
            return std::nullopt;
        };
        apply_block(*registry_, order_, states_, blk.header, *fetched, lookup);
        height_ = blk.header.height;
    }

private:
    std::map<nmt::NamespaceId, std::vector<nmt::Message>> fetch(const AcceptedBlock& blk, StoragePeer& peer)
    {
        std::map<nmt::NamespaceId, std::vector<nmt::Message>> out;
        for (auto ns : order_) {
            std::optional<std::vector<nmt::Message>> msgs;
            if (blk.header.mode == ValidityMode::Probabilistic) {
                auto slices = peer.query_rows(blk.header, ns);
                if (!slices) throw PeerMisbehavior("peer has no row data");
                for (const auto& s : *slices) {
                    for (const auto& sh : s.shares) stats_.leaf_bytes[sh.ns] += sh.serialized_size();
                    stats_.proof_bytes += s.proof_bytes();
                }
                msgs = verify_row_slices(blk.line_roots, blk.header.k, ns, *slices);
            } else {
                auto resp = peer.query(blk.header, ns);
                if (!resp) throw PeerMisbehavior("peer has no block data");
                for (const auto& m : resp->messages) stats_.leaf_bytes[m.ns] += m.payload.size();
                stats_.proof_bytes += resp->proof_bytes();
                msgs = verify_namespace_response(blk.header, ns, *resp);
            }
            if (!msgs) throw PeerMisbehavior("incomplete namespace proof for namespace " + std::to_string(ns.value));
            out[ns] = std::move(*msgs);
        }
        return out;
    }

    const AppRegistry* registry_;
    nmt::NamespaceId app_;
    std::vector<nmt::NamespaceId> order_;
    std::map<nmt::NamespaceId, AppState> states_;
    DownloadStats stats_;
    std::uint64_t height_ = 0;
};

/// Syncs `blocks` from a single peer. Throws PeerMisbehavior on the first
/// incomplete answer; the client keeps the blocks applied before it.
inline const AppState& sync_app(AppClient& client, StoragePeer& peer, std::span<const AcceptedBlock> blocks)
{
    StoragePeer* one[] = {&peer};
    for (const auto& b : blocks) {
        if (b.header.height <= client.height()) continue;
        client.sync_block(b, one);
    }
    return client.state();
}

/// Full-block replay: every state in the app's dependency closure.
inline std::map<nmt::NamespaceId, AppState> replay_states(const AppRegistry& registry, nmt::NamespaceId app,
    std::span<const Block> blocks)
{
    auto order = registry.closure(app);
    std::map<nmt::NamespaceId, AppState> states;
    for (auto ns : order) states[ns] = registry.at(ns).genesis;
    for (const auto& b : blocks) {
        std::map<nmt::NamespaceId, std::vector<nmt::Message>> by_ns;
        for (const auto& m : b.messages) by_ns[m.ns].push_back(m);
        LeafLookup lookup = [&](const Hash32& h) { return serve_leaf(b, h); };
        apply_block(registry, order, states, b.header, by_ns, lookup);
    }
    return states;
}

inline AppState replay(const AppRegistry& registry, nmt::NamespaceId app, std::span<const Block> blocks)
{
    return replay_states(registry, app, blocks).at(app);
}

} // namespace daledger::apps
