#pragma once

// Simulation output: per-node verdicts for the checkers, and flat metric
// rows for CSV.

#include <ostream>
#include <set>

#include "daledger/netsim/config.hpp"

namespace daledger::netsim {

struct TraceRow {
    std::size_t node = 0;
    NodeKind kind = NodeKind::Client;
    std::uint64_t round = 0;
    std::string metric;
    std::string value;
};

/// What one node decided about one block, by round.
struct NodeVerdict {
    std::optional<std::uint64_t> accept;
    std::optional<std::uint64_t> reject;
    /// Acceptance withdrawn after a valid fraud proof.
    std::optional<std::uint64_t> revoke;
    /// First round the node held the complete block data.
    std::optional<std::uint64_t> data;

    bool accepted() const { return accept && !revoke; }
};

struct BlockRecord {
    Hash32 id{};
    std::uint64_t height = 0;
    std::size_t producer = 0;
    std::uint64_t round = 0;
    std::size_t k = 0;
    std::size_t withheld = 0;
};

struct AppResult {
    std::size_t node = 0;
    nmt::NamespaceId ns;
    Hash32 commitment{};
    Hash32 oracle{};
    std::size_t synced_blocks = 0;
    std::size_t chain_blocks = 0;
    std::size_t leaf_bytes = 0;
    std::size_t foreign_leaf_bytes = 0;
    std::size_t proof_bytes = 0;
    std::size_t rejected_responses = 0;

    bool matches_oracle() const { return commitment == oracle && synced_blocks == chain_blocks; }
};

struct Trace {
    std::string scenario;
    std::uint64_t rounds = 0;
    std::uint64_t delta = 1;
    std::uint64_t hop_bound = kDefaultHopBound;
    ValidityMode mode = ValidityMode::Simplistic;
    std::vector<NodeSpec> nodes;
    std::vector<BlockRecord> blocks;
    /// Keyed by (node, block index).
    std::map<std::pair<std::size_t, std::size_t>, NodeVerdict> verdicts;
    std::vector<std::uint64_t> bytes_down;
    std::vector<std::uint64_t> bytes_up;
    std::vector<AppResult> apps;
    /// Cells storage nodes received from samplers, by block index.
    std::map<std::size_t, std::set<CellIndex>> gossiped_cells;
    std::vector<TraceRow> rows;

    std::uint64_t window() const { return hop_bound * delta; }

    NodeVerdict verdict(std::size_t node, std::size_t block) const
    {
        auto it = verdicts.find({node, block});
        return it == verdicts.end() ? NodeVerdict{} : it->second;
    }

    void write_csv(std::ostream& out, bool header = true) const
    {
        if (header) out << "scenario,node,kind,round,metric,value\n";
        for (const auto& r : rows) {
            out << scenario << ',' << r.node << ',' << kind_name(r.kind) << ',' << r.round << ',' << r.metric << ','
                << r.value << '\n';
        }
    }

    std::string csv() const
    {
        std::ostringstream s;
        write_csv(s);
        return s.str();
    }
};

/// Every block an honest node accepted is fully held by some honest
/// storage node within the window after that acceptance.
inline bool check_soundness(const Trace& t)
{
    for (std::size_t b = 0; b < t.blocks.size(); ++b) {
        for (const auto& n : t.nodes) {
            if (!n.honest) continue;
            auto v = t.verdict(n.id, b);
            if (!v.accepted()) continue;
            bool held = false;
            for (const auto& s : t.nodes) {
                if (!s.honest || s.kind != NodeKind::Storage) continue;
                auto d = t.verdict(s.id, b).data;
                held = held || (d && *d <= *v.accept + t.window());
            }
            if (!held) return false;
        }
    }
    return true;
}

/// Every block an honest node accepted is accepted by all honest nodes
/// within the window after the first acceptance.
inline bool check_agreement(const Trace& t)
{
    for (std::size_t b = 0; b < t.blocks.size(); ++b) {
        std::optional<std::uint64_t> first;
        for (const auto& n : t.nodes) {
            auto v = t.verdict(n.id, b);
            if (n.honest && v.accepted() && (!first || *v.accept < *first)) first = v.accept;
        }
        if (!first) continue;
        for (const auto& n : t.nodes) {
            if (!n.honest) continue;
            auto v = t.verdict(n.id, b);
            if (!v.accepted() || *v.accept > *first + t.window()) return false;
        }
    }
    return true;
}

} // namespace daledger::netsim
