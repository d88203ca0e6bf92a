#pragma once

// Deterministic lock-step network simulator.
//
// Gossip (headers, simplistic blocks, fraud proofs) moves one hop per round
// and is relayed by honest nodes only. Requests and responses go straight
// to their target and arrive after the hop distance over honest relays.
// Full nodes (storage, or simplistic rule) pull the extended square from
// the producer and fall back to storage nodes; samplers pull their cells
// from the producer, fall back to storage nodes, and forward every verified
// cell to the storage nodes, which rebuild the square once they can.

#include <deque>
#include <set>

#include "daledger/apps/sync.hpp"
#include "daledger/netsim/trace.hpp"

namespace daledger::netsim {

class Engine {
public:
    explicit Engine(ScenarioConfig cfg) : cfg_(std::move(cfg)), gen_(cfg_.seed)
    {
        validate();
        mode_ = cfg_.block_mode();
        for (const auto& spec : cfg_.nodes) {
            Node n;
            n.spec = spec;
            n.key = apps::Keypair::from_label("node-" + std::to_string(spec.id));
            n.view.add(genesis_header(), true);
            for (auto ns : spec.apps) n.apps.push_back(AppSync{ns, apps::AppClient(gen_.registry(), ns), {}});
            nodes_.push_back(std::move(n));
        }
        trace_.scenario = cfg_.name;
        trace_.rounds = cfg_.rounds;
        trace_.delta = delta_;
        trace_.hop_bound = cfg_.hop_bound;
        trace_.mode = mode_;
        trace_.nodes = cfg_.nodes;
        trace_.bytes_down.assign(nodes_.size(), 0);
        trace_.bytes_up.assign(nodes_.size(), 0);
    }

    std::uint64_t delta() const { return delta_; }
    std::uint64_t distance(std::size_t a, std::size_t b) const { return dist_[a][b]; }

    Trace run()
    {
        auto schedule = cfg_.schedule;
        std::stable_sort(schedule.begin(), schedule.end(), [](const auto& a, const auto& b) { return a.round < b.round; });
        std::size_t next = 0;
        for (now_ = 0; now_ <= cfg_.rounds; ++now_) {
            while (!queue_.empty() && queue_.begin()->first == now_) {
                Packet p = queue_.begin()->second;
                queue_.erase(queue_.begin());
                trace_.bytes_down[p.to] += p.bytes;
                deliver(p);
            }
            while (next < schedule.size() && schedule[next].round == now_) produce(schedule[next++]);
            timers();
            sync_apps();
        }
        finish();
        return std::move(trace_);
    }

private:
    enum class Msg { Header, Block, GetSquare, Square, SampleReq, SampleResp, Cell, Fraud };

    struct Packet {
        Msg kind = Msg::Header;
        std::size_t from = 0;
        std::size_t to = 0;
        std::size_t block = 0;
        CellIndex cell;
        /// Square from the producer: only released cells.
        bool partial = false;
        std::uint64_t bytes = 0;
    };

    struct Truth {
        std::shared_ptr<Block> block;
        std::size_t producer = 0;
        std::vector<nmt::NamespacedDigest> line_roots;
        std::set<std::size_t> withheld;
        bool withhold_all = false;
        bool samples_only = false;
        std::optional<CodingFraudProof> proof;
        std::vector<nmt::Tree> row_trees;
    };

    // One node's view of one block.
    struct Local {
        bool have_header = false;
        bool full = false;
        bool accepted = false;
        bool rejected = false;
        bool fraud = false;
        bool block_relayed = false;
        std::optional<ExtendedDataSquare> cells;
        std::size_t known = 0;
        std::size_t last_attempt = 0;
        std::vector<CellIndex> samples;
        std::set<CellIndex> verified;
        std::uint64_t sample_fallback = 0;
        std::uint64_t deadline = 0;
        std::uint64_t fetch_fallback = 0;
        std::vector<std::size_t> pending_squares;
        std::vector<std::pair<std::size_t, CellIndex>> pending_samples;
    };

    struct AppSync {
        nmt::NamespaceId ns;
        apps::AppClient client;
        std::vector<std::size_t> synced;
    };

    struct Node {
        NodeSpec spec;
        apps::Keypair key;
        ChainView view;
        std::map<std::size_t, Local> blocks;
        std::vector<AppSync> apps;
    };

    // Storage node as seen by an application client.
    class NodePeer : public apps::StoragePeer {
    public:
        NodePeer(Engine& e, std::size_t id) : e_(&e), id_(id) {}

        std::optional<apps::NamespaceResponse> query(const BlockHeader& h, nmt::NamespaceId nid) override
        {
            auto b = held(h);
            if (!b) return std::nullopt;
            auto r = apps::serve_namespace(*b, nid);
            if (omits(nid)) apps::omit_last(r);
            e_->trace_.bytes_up[id_] += r.leaf_bytes() + r.proof_bytes();
            return r;
        }

        std::optional<std::vector<apps::RowSlice>> query_rows(const BlockHeader& h, nmt::NamespaceId nid) override
        {
            auto b = held(h);
            if (!b || !b->square) return std::nullopt;
            auto r = apps::serve_rows(*b, nid);
            if (omits(nid)) apps::omit_last(r);
            for (const auto& s : r) e_->trace_.bytes_up[id_] += s.leaf_bytes() + s.proof_bytes();
            return r;
        }

        std::optional<nmt::InclusionProof> leaf_proof(const BlockHeader& h, const Hash32& leaf_hash) override
        {
            auto b = held(h);
            if (!b) return std::nullopt;
            auto p = apps::serve_leaf(*b, leaf_hash);
            if (p) e_->trace_.bytes_up[id_] += apps::inclusion_proof_bytes(*p);
            return p;
        }

    private:
        const Block* held(const BlockHeader& h) const
        {
            auto it = e_->index_.find(h.hash());
            if (it == e_->index_.end()) return nullptr;
            auto& local = e_->nodes_[id_].blocks;
            auto l = local.find(it->second);
            if (l == local.end() || !l->second.full) return nullptr;
            return e_->truths_[it->second].block.get();
        }

        bool omits(nmt::NamespaceId nid) const
        {
            return !e_->nodes_[id_].spec.honest && e_->cfg_.adversary.kind == AdversaryKind::OmitNamespace
                && e_->cfg_.adversary.ns == nid;
        }

        Engine* e_;
        std::size_t id_;
    };

    void validate()
    {
        const auto& nodes = cfg_.nodes;
        if (nodes.empty()) throw ConfigError("scenario has no nodes");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].id != i) throw ConfigError("node ids must be 0..n-1 in order");
            if (nodes[i].stake < 0 || nodes[i].stake > 1) throw ConfigError("stake must be a fraction");
        }
        bool honest_storage = false;
        for (const auto& n : nodes) honest_storage = honest_storage || (n.honest && n.kind == NodeKind::Storage);
        if (!honest_storage) throw ConfigError("scenario needs at least one honest storage node");
        adj_.assign(nodes.size(), {});
        for (auto [a, b] : cfg_.edges) {
            if (a >= nodes.size() || b >= nodes.size() || a == b) throw ConfigError("edge refers to a bad node id");
            adj_[a].push_back(b);
            adj_[b].push_back(a);
        }
        for (auto& l : adj_) {
            std::sort(l.begin(), l.end());
            l.erase(std::unique(l.begin(), l.end()), l.end());
        }
        // Hop distance with honest relays only.
        dist_.assign(nodes.size(), std::vector<std::uint64_t>(nodes.size(), kUnreachable));
        for (std::size_t s = 0; s < nodes.size(); ++s) {
            std::deque<std::size_t> q{s};
            dist_[s][s] = 0;
            while (!q.empty()) {
                auto u = q.front();
                q.pop_front();
                if (u != s && !nodes[u].honest) continue;
                for (auto v : adj_[u]) {
                    if (dist_[s][v] != kUnreachable) continue;
                    dist_[s][v] = dist_[s][u] + 1;
                    q.push_back(v);
                }
            }
        }
        std::uint64_t diameter = 0;
        for (const auto& a : nodes)
            for (const auto& b : nodes) {
                if (!a.honest || !b.honest) continue;
                if (dist_[a.id][b.id] == kUnreachable) throw ConfigError("honest nodes are not connected");
                diameter = std::max(diameter, dist_[a.id][b.id]);
            }
        delta_ = std::max<std::uint64_t>(1, diameter);
        if (cfg_.delta) {
            if (cfg_.delta < diameter) throw ConfigError("delta is below the honest diameter");
            delta_ = cfg_.delta;
        }
        if (cfg_.hop_bound == 0) throw ConfigError("hop_bound must be positive");
        if (cfg_.share_size <= kShareNamespacePrefix) throw ConfigError("share_size too small");
        std::uint64_t last = 0;
        for (const auto& e : cfg_.schedule) {
            if (e.producer >= nodes.size() || nodes[e.producer].kind != NodeKind::Consensus) {
                throw ConfigError("blocks must be produced by consensus nodes");
            }
            for (std::size_t v = 0; v < nodes.size(); ++v)
                if (dist_[e.producer][v] == kUnreachable) throw ConfigError("producer cannot reach every node");
            last = std::max(last, e.round);
        }
        if (!cfg_.schedule.empty() && cfg_.rounds < last + (cfg_.hop_bound + 3) * delta_ + 3) {
            throw ConfigError("rounds too short: need at least " + std::to_string(last + (cfg_.hop_bound + 3) * delta_ + 3));
        }
    }

    bool honest(std::size_t i) const { return nodes_[i].spec.honest; }

    bool full_node(std::size_t i) const
    {
        const auto& s = nodes_[i].spec;
        return mode_ == ValidityMode::Simplistic || s.kind == NodeKind::Storage || s.rule == ValidityMode::Simplistic;
    }

    const BlockHeader& header(std::size_t b) const { return truths_[b].block->header; }
    std::size_t width(std::size_t b) const { return 2 * truths_[b].block->header.k; }

    std::vector<nmt::NamespacedDigest> roots(std::size_t b, Axis axis) const
    {
        const auto& lr = truths_[b].line_roots;
        auto w = static_cast<std::ptrdiff_t>(width(b));
        return axis == Axis::Row ? std::vector<nmt::NamespacedDigest>(lr.begin(), lr.begin() + w)
                                 : std::vector<nmt::NamespacedDigest>(lr.begin() + w, lr.end());
    }

    void event(std::size_t node, const std::string& metric, const std::string& value)
    {
        trace_.rows.push_back(TraceRow{node, nodes_[node].spec.kind, now_, metric, value});
    }

    void send(Msg kind, std::size_t from, std::size_t to, std::size_t block, std::uint64_t bytes, bool gossip,
        CellIndex cell = {}, bool partial = false)
    {
        if (from == to) return;
        std::uint64_t d = gossip ? 1 : dist_[from][to];
        if (d == kUnreachable) return;
        if (!gossip && honest(from) && honest(to) && d > delta_) throw std::logic_error("honest delivery exceeds delta");
        trace_.bytes_up[from] += bytes;
        queue_.emplace(now_ + d, Packet{kind, from, to, block, cell, partial, bytes});
    }

    void gossip(Msg kind, std::size_t from, std::size_t block, std::uint64_t bytes, std::optional<std::size_t> except)
    {
        for (auto v : adj_[from])
            if (!except || v != *except) send(kind, from, v, block, bytes, true);
    }

    apps::AcceptedBlock accepted_block(std::size_t b) const
    {
        return apps::AcceptedBlock{header(b), mode_ == ValidityMode::Probabilistic ? truths_[b].line_roots
                                                                                : std::vector<nmt::NamespacedDigest>{}};
    }

    std::uint64_t header_bytes(std::size_t b) const
    {
        return BlockHeader::kEncodedSize + truths_[b].line_roots.size() * nmt::kDigestSize;
    }

    SampleResponse sample(std::size_t b, CellIndex at)
    {
        auto& t = truths_[b];
        if (t.row_trees.empty()) {
            for (std::size_t r = 0; r < width(b); ++r) t.row_trees.push_back(line_tree(t.block->square->line(Axis::Row, r)));
        }
        return SampleResponse{*t.block->square->cell(at.row, at.col), t.row_trees[at.row].audit_path(at.col)};
    }

    std::size_t flat(std::size_t b, CellIndex c) const { return c.row * width(b) + c.col; }

    // Verdict bookkeeping.

    NodeVerdict& verdict(std::size_t i, std::size_t b) { return trace_.verdicts[{i, b}]; }

    void accept(std::size_t i, std::size_t b)
    {
        auto& l = nodes_[i].blocks[b];
        if (l.accepted || l.rejected || l.fraud) return;
        l.accepted = true;
        verdict(i, b).accept = now_;
        event(i, "accept", std::to_string(b));
        nodes_[i].view.add(header(b), true);
    }

    void reject(std::size_t i, std::size_t b, const char* why)
    {
        auto& l = nodes_[i].blocks[b];
        if (l.rejected) return;
        l.rejected = true;
        if (l.accepted) {
            verdict(i, b).revoke = now_;
            event(i, "revoke", std::to_string(b));
        } else {
            verdict(i, b).reject = now_;
            event(i, std::string("reject_") + why, std::to_string(b));
        }
        nodes_[i].view.add(header(b), false);
    }

    void hold_full(std::size_t i, std::size_t b)
    {
        auto& l = nodes_[i].blocks[b];
        if (l.full) return;
        l.full = true;
        verdict(i, b).data = now_;
        event(i, "data_complete", std::to_string(b));
        if (full_node(i) && !l.rejected) accept(i, b);
        for (auto who : l.pending_squares) send_square(i, who, b, false);
        l.pending_squares.clear();
        for (auto [who, cell] : l.pending_samples) send(Msg::SampleResp, i, who, b, sample(b, cell).serialized_size(), false, cell);
        l.pending_samples.clear();
    }

    // Full data for a requester: the whole block under the simplistic rule,
    // square cells otherwise. A producer only releases what it does not withhold.
    void send_square(std::size_t from, std::size_t to, std::size_t b, bool partial)
    {
        const auto& t = truths_[b];
        if (!t.block->square) {
            if (!(partial && t.withhold_all)) send(Msg::Block, from, to, b, t.block->encode().size(), false);
            return;
        }
        std::size_t cells = width(b) * width(b) - (partial ? t.withheld.size() : 0);
        send(Msg::Square, from, to, b, cells * t.block->square->cell(0, 0)->serialized_size(), false, {}, partial);
    }

    Local& ensure_cells(std::size_t i, std::size_t b)
    {
        auto& l = nodes_[i].blocks[b];
        if (!l.cells) {
            ExtendedDataSquare sq;
            sq.k = header(b).k;
            sq.cells.assign(width(b) * width(b), std::nullopt);
            l.cells = std::move(sq);
        }
        return l;
    }

    void put_cell(Local& l, std::size_t b, CellIndex c)
    {
        auto& slot = l.cells->cell(c.row, c.col);
        if (slot) return;
        slot = *truths_[b].block->square->cell(c.row, c.col);
        ++l.known;
    }

    void try_complete(std::size_t i, std::size_t b)
    {
        auto& l = nodes_[i].blocks[b];
        if (l.full || l.rejected || !l.cells) return;
        std::size_t k = header(b).k;
        if (l.known < k * k || l.known == l.last_attempt) return;
        l.last_attempt = l.known;
        bool filled = l.known < width(b) * width(b);
        auto res = reconstruct(*l.cells, roots(b, Axis::Row), roots(b, Axis::Column));
        if (res.status == ReconstructResult::Status::Unrecoverable) {
            l.cells = std::move(res.square);
            l.known = 0;
            for (const auto& c : l.cells->cells) l.known += c.has_value();
            l.last_attempt = l.known;
            return;
        }
        if (res.status == ReconstructResult::Status::RootMismatch) {
            auto proof = find_coding_fraud(res.square);
            if (proof) {
                truths_[b].proof = proof;
                l.fraud = true;
                event(i, "fraud_emitted", std::to_string(b));
                gossip(Msg::Fraud, i, b, proof->serialized_size(), std::nullopt);
            }
            reject(i, b, "encoding");
            return;
        }
        l.cells = std::move(res.square);
        bool root_ok = false;
        try {
            auto msgs = parse_shares(l.cells->original_shares());
            root_ok = message_root(msgs, share_hasher()) == header(b).m_root;
        } catch (const Error&) {
        }
        if (!root_ok) {
            reject(i, b, "message_root");
            return;
        }
        if (filled) event(i, "reconstructed", std::to_string(b));
        hold_full(i, b);
    }

    // Message handlers.

    void deliver(const Packet& p)
    {
        switch (p.kind) {
        case Msg::Header: on_header(p.to, p.block, p.from); break;
        case Msg::Block: on_block(p.to, p.block, p.from); break;
        case Msg::GetSquare: on_get_square(p.to, p.block, p.from); break;
        case Msg::Square: on_square(p.to, p.block, p.partial); break;
        case Msg::SampleReq: on_sample_req(p.to, p.block, p.from, p.cell); break;
        case Msg::SampleResp: on_sample_resp(p.to, p.block, p.cell); break;
        case Msg::Cell: on_cell(p.to, p.block, p.cell); break;
        case Msg::Fraud: on_fraud(p.to, p.block, p.from); break;
        }
    }

    void on_header(std::size_t i, std::size_t b, std::optional<std::size_t> from)
    {
        auto& l = nodes_[i].blocks[b];
        if (l.have_header) return;
        l.have_header = true;
        if (honest(i)) gossip(Msg::Header, i, b, header_bytes(b), from);
        if (mode_ == ValidityMode::Probabilistic && !line_roots_match(header(b), truths_[b].line_roots)) {
            reject(i, b, "roots");
            return;
        }
        std::size_t producer = truths_[b].producer;
        std::uint64_t rtt = 2 * dist_[i][producer] + 1;
        if (full_node(i)) {
            if (!l.full) send(Msg::GetSquare, i, producer, b, Hash32{}.size(), false);
            l.fetch_fallback = now_ + rtt;
            l.deadline = l.fetch_fallback + 2 * delta_ + 1;
            return;
        }
        std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
            static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(b)};
        std::mt19937_64 rng(seq);
        l.samples = draw_cells(rng, header(b).k, nodes_[i].spec.samples);
        for (auto c : l.samples) send(Msg::SampleReq, i, producer, b, Hash32{}.size() + 8, false, c);
        l.sample_fallback = now_ + rtt;
        l.deadline = l.sample_fallback + 2 * delta_ + 1;
        if (l.samples.empty()) accept(i, b);
    }

    void on_block(std::size_t i, std::size_t b, std::size_t from)
    {
        auto& l = nodes_[i].blocks[b];
        l.have_header = true;
        if (l.block_relayed) return;
        l.block_relayed = true;
        const auto& blk = *truths_[b].block;
        if (message_root(blk.messages, share_hasher()) != blk.header.m_root) {
            reject(i, b, "message_root");
            return;
        }
        hold_full(i, b);
        if (honest(i)) gossip(Msg::Block, i, b, blk.encode().size(), from);
    }

    void on_get_square(std::size_t i, std::size_t b, std::size_t from)
    {
        const auto& t = truths_[b];
        auto& l = nodes_[i].blocks[b];
        if (i == t.producer) {
            if (!t.samples_only) send_square(i, from, b, true);
        } else if (l.full) {
            send_square(i, from, b, false);
        } else if (nodes_[i].spec.kind == NodeKind::Storage) {
            l.pending_squares.push_back(from);
        }
    }

    void on_square(std::size_t i, std::size_t b, bool partial)
    {
        auto& l = ensure_cells(i, b);
        const auto& t = truths_[b];
        for (std::size_t r = 0; r < width(b); ++r)
            for (std::size_t c = 0; c < width(b); ++c) {
                CellIndex at{r, c};
                if (!partial || !t.withheld.count(flat(b, at))) put_cell(l, b, at);
            }
        try_complete(i, b);
    }

    void on_sample_req(std::size_t i, std::size_t b, std::size_t from, CellIndex at)
    {
        const auto& t = truths_[b];
        auto& l = nodes_[i].blocks[b];
        bool answer = false;
        if (i == t.producer) {
            answer = !t.withheld.count(flat(b, at));
        } else if (l.full || (l.cells && l.cells->cell(at.row, at.col))) {
            answer = true;
        } else if (nodes_[i].spec.kind == NodeKind::Storage) {
            l.pending_samples.emplace_back(from, at);
        }
        if (answer) send(Msg::SampleResp, i, from, b, sample(b, at).serialized_size(), false, at);
    }

    void on_sample_resp(std::size_t i, std::size_t b, CellIndex at)
    {
        auto& l = nodes_[i].blocks[b];
        if (l.accepted || l.rejected || l.verified.count(at)) return;
        if (std::find(l.samples.begin(), l.samples.end(), at) == l.samples.end()) return;
        auto resp = sample(b, at);
        if (!verify_sample(roots(b, Axis::Row), at, resp)) return;
        l.verified.insert(at);
        if (honest(i)) {
            for (const auto& n : nodes_)
                if (n.spec.kind == NodeKind::Storage) send(Msg::Cell, i, n.spec.id, b, resp.serialized_size(), false, at);
        }
        if (l.verified.size() == l.samples.size()) accept(i, b);
    }

    void on_cell(std::size_t i, std::size_t b, CellIndex at)
    {
        trace_.gossiped_cells[b].insert(at);
        auto& l = ensure_cells(i, b);
        if (!verify_sample(roots(b, Axis::Row), at, sample(b, at))) return;
        put_cell(l, b, at);
        auto& pend = l.pending_samples;
        for (auto it = pend.begin(); it != pend.end();) {
            if (it->second == at) {
                send(Msg::SampleResp, i, it->first, b, sample(b, at).serialized_size(), false, at);
                it = pend.erase(it);
            } else {
                ++it;
            }
        }
        try_complete(i, b);
    }

    void on_fraud(std::size_t i, std::size_t b, std::size_t from)
    {
        auto& l = nodes_[i].blocks[b];
        if (!l.have_header) on_header(i, b, std::nullopt);
        if (l.fraud || !truths_[b].proof) return;
        if (!verify_coding_fraud_proof(roots(b, Axis::Row), roots(b, Axis::Column), *truths_[b].proof)) return;
        l.fraud = true;
        event(i, "fraud_verified", std::to_string(b));
        reject(i, b, "fraud");
        if (honest(i)) gossip(Msg::Fraud, i, b, truths_[b].proof->serialized_size(), from);
    }

    void timers()
    {
        for (auto& n : nodes_) {
            std::size_t i = n.spec.id;
            for (auto& [b, l] : n.blocks) {
                if (!l.have_header || l.rejected || l.accepted || truths_[b].producer == i) continue;
                if (full_node(i)) {
                    if (l.full) continue;
                    if (now_ == l.fetch_fallback) {
                        for (const auto& s : nodes_)
                            if (s.spec.kind == NodeKind::Storage) send(Msg::GetSquare, i, s.spec.id, b, Hash32{}.size(), false);
                    }
                } else if (now_ == l.sample_fallback) {
                    for (auto c : l.samples) {
                        if (l.verified.count(c)) continue;
                        for (const auto& s : nodes_)
                            if (s.spec.kind == NodeKind::Storage) send(Msg::SampleReq, i, s.spec.id, b, Hash32{}.size() + 8, false, c);
                    }
                }
                if (now_ >= l.deadline) reject(i, b, "timeout");
            }
        }
    }

    void produce(const ProduceEvent& e)
    {
        auto& n = nodes_[e.producer];
        BlockHeader parent = genesis_header();
        if (auto tip = n.view.best_tip()) {
            auto it = index_.find(*tip);
            if (it != index_.end()) parent = header(it->second);
        }
        auto body = gen_.body(e.work, n.key.pk);
        Truth t;
        try {
            t.block = std::make_shared<Block>(make_block(parent, std::move(body), mode_, SIZE_MAX, cfg_.share_size));
        } catch (const BlockTooLarge& err) {
            throw ConfigError(std::string("block workload too large: ") + err.what());
        }
        t.producer = e.producer;
        const auto& adv = cfg_.adversary;
        bool attacking = !n.spec.honest;
        if (t.block->square) {
            auto& sq = *t.block->square;
            if (attacking && adv.kind == AdversaryKind::BadEncoding) {
                std::size_t w = sq.width();
                std::size_t idx = adv.index % w;
                auto& cell = adv.axis == Axis::Row ? sq.cell(idx, w - 1) : sq.cell(w - 1, idx);
                cell->data.back() ^= 0x5a;
                sq.commit();
                t.block->header.availability_root = availability_root(sq.line_roots());
            }
            t.line_roots = sq.line_roots();
            if (attacking && adv.kind == AdversaryKind::Withhold) {
                std::size_t w = sq.width();
                for (auto c : adv.cells)
                    if (c.row < w && c.col < w) t.withheld.insert(c.row * w + c.col);
                for (std::size_t r = 0; r < std::min(adv.square, w); ++r)
                    for (std::size_t c = 0; c < std::min(adv.square, w); ++c) t.withheld.insert(r * w + c);
            }
            t.samples_only = attacking && adv.kind == AdversaryKind::ReleaseSamplesOnly;
        } else {
            t.withhold_all = attacking
                && ((adv.kind == AdversaryKind::Withhold && (!adv.cells.empty() || adv.square > 0))
                    || adv.kind == AdversaryKind::ReleaseSamplesOnly);
        }
        std::size_t b = truths_.size();
        auto id = t.block->header.hash();
        index_[id] = b;
        trace_.blocks.push_back(BlockRecord{id, t.block->header.height, e.producer, now_, t.block->header.k, t.withheld.size()});
        truths_.push_back(std::move(t));
        event(e.producer, "produce", std::to_string(b));

        auto& l = n.blocks[b];
        l.have_header = true;
        l.block_relayed = true;
        hold_full(e.producer, b);
        accept(e.producer, b);
        if (mode_ == ValidityMode::Simplistic && !truths_[b].withhold_all) {
            gossip(Msg::Block, e.producer, b, truths_[b].block->encode().size(), std::nullopt);
        } else {
            gossip(Msg::Header, e.producer, b, header_bytes(b), std::nullopt);
        }
    }

    // Accepted chain of a node, oldest first, as block indices.
    std::vector<std::size_t> chain_of(std::size_t i) const
    {
        std::vector<std::size_t> out;
        auto tip = nodes_[i].view.best_tip();
        while (tip) {
            auto it = index_.find(*tip);
            if (it == index_.end()) break;
            out.push_back(it->second);
            tip = header(it->second).prev_hash;
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

    void sync_apps()
    {
        std::vector<NodePeer> adapters;
        for (const auto& n : nodes_)
            if (n.spec.kind == NodeKind::Storage) adapters.emplace_back(*this, n.spec.id);
        std::vector<apps::StoragePeer*> peers;
        for (auto& a : adapters) peers.push_back(&a);
        for (auto& n : nodes_) {
            if (n.apps.empty()) continue;
            auto chain = chain_of(n.spec.id);
            for (auto& a : n.apps) {
                bool prefix = a.synced.size() <= chain.size() && std::equal(a.synced.begin(), a.synced.end(), chain.begin());
                if (!prefix) {
                    a.client = apps::AppClient(gen_.registry(), a.ns);
                    a.synced.clear();
                    event(n.spec.id, "app_resync", std::to_string(a.ns.value));
                }
                for (std::size_t j = a.synced.size(); j < chain.size(); ++j) {
                    auto before = a.client.stats().total();
                    bool ok = true;
                    try {
                        a.client.sync_block(accepted_block(chain[j]), peers);
                    } catch (const PeerMisbehavior&) {
                        ok = false;
                    }
                    trace_.bytes_down[n.spec.id] += a.client.stats().total() - before;
                    if (!ok) break;
                    a.synced.push_back(chain[j]);
                }
            }
        }
    }

    void finish()
    {
        now_ = cfg_.rounds;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            event(i, "bytes_down", std::to_string(trace_.bytes_down[i]));
            event(i, "bytes_up", std::to_string(trace_.bytes_up[i]));
        }
        for (auto& n : nodes_) {
            auto chain = chain_of(n.spec.id);
            std::vector<Block> blocks;
            for (auto b : chain) blocks.push_back(*truths_[b].block);
            for (auto& a : n.apps) {
                AppResult r;
                r.node = n.spec.id;
                r.ns = a.ns;
                r.commitment = a.client.state().commitment();
                r.oracle = apps::replay(gen_.registry(), a.ns, blocks).commitment();
                r.synced_blocks = a.synced.size();
                r.chain_blocks = chain.size();
                const auto& st = a.client.stats();
                r.leaf_bytes = st.total_leaf_bytes();
                r.proof_bytes = st.proof_bytes;
                r.rejected_responses = st.rejected_responses;
                const auto& own = a.client.namespaces();
                for (const auto& [ns, bytes] : st.leaf_bytes)
                    if (std::find(own.begin(), own.end(), ns) == own.end()) r.foreign_leaf_bytes += bytes;
                std::string tag = std::to_string(a.ns.value);
                event(r.node, "app_commitment_" + tag, to_hex(r.commitment));
                event(r.node, "app_oracle_match_" + tag, r.matches_oracle() ? "1" : "0");
                event(r.node, "app_synced_blocks_" + tag, std::to_string(r.synced_blocks));
                event(r.node, "app_leaf_bytes_" + tag, std::to_string(r.leaf_bytes));
                event(r.node, "app_foreign_leaf_bytes_" + tag, std::to_string(r.foreign_leaf_bytes));
                event(r.node, "app_proof_bytes_" + tag, std::to_string(r.proof_bytes));
                event(r.node, "app_rejected_responses_" + tag, std::to_string(r.rejected_responses));
                trace_.apps.push_back(r);
            }
        }
    }

    static constexpr std::uint64_t kUnreachable = UINT64_MAX;

    ScenarioConfig cfg_;
    workload::Generator gen_;
    ValidityMode mode_ = ValidityMode::Simplistic;
    std::uint64_t delta_ = 1;
    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::vector<std::uint64_t>> dist_;
    std::vector<Node> nodes_;
    std::vector<Truth> truths_;
    std::map<Hash32, std::size_t> index_;
    std::multimap<std::uint64_t, Packet> queue_;
    std::uint64_t now_ = 0;
    Trace trace_;
};

inline Trace run_scenario(const ScenarioConfig& cfg) { return Engine(cfg).run(); }

} // namespace daledger::netsim
