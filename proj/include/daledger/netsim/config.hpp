#pragma once

// Scenario description for the round-based network simulator, and its
// text format.
//
// One "key = value" per line, '#' starts a comment:
//   name = line3
//   seed = 7
//   rounds = 40
//   delta = 2                 # optional, defaults to the honest diameter
//   hop_bound = 5             # window is hop_bound * delta rounds
//   share_size = 64
//   node = <id> consensus|storage|client [honest=0|1] [stake=x]
//          [rule=simplistic|probabilistic] [samples=n] [apps=currency,registrar]
//   edge = <a> <b>
//   produce = <round> <node> [transfers=n] [dummy=n] [dummy_size=n] [topups=n]
//             [other_topups=n] [registrations=n] [other_registrations=n] [fees=n]
//   adversary = none
//             | withhold [cells=r:c,r:c] [square=n]
//             | bad_encoding [axis=row|column] [index=i]
//             | omit_namespace app=<name>
//             | release_samples_only

#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "daledger/block.hpp"
#include "daledger/workload.hpp"

namespace daledger::netsim {

enum class NodeKind { Consensus, Storage, Client };

inline const char* kind_name(NodeKind k)
{
    switch (k) {
    case NodeKind::Consensus: return "consensus";
    case NodeKind::Storage: return "storage";
    default: return "client";
    }
}

struct NodeSpec {
    std::size_t id = 0;
    NodeKind kind = NodeKind::Client;
    bool honest = true;
    double stake = 0;
    std::vector<nmt::NamespaceId> apps;
    ValidityMode rule = ValidityMode::Simplistic;
    std::size_t samples = sampler::kDefaultSampleCount;
};

enum class AdversaryKind { None, Withhold, BadEncoding, OmitNamespace, ReleaseSamplesOnly };

/// Static strategy followed by every dishonest node it applies to:
/// producers for withholding and encoding attacks, storage nodes for
/// namespace omission.
struct AdversarySpec {
    AdversaryKind kind = AdversaryKind::None;
    std::vector<CellIndex> cells;
    /// Also withhold the top-left square x square block of cells.
    std::size_t square = 0;
    Axis axis = Axis::Row;
    std::size_t index = 0;
    nmt::NamespaceId ns;
};

struct ProduceEvent {
    std::uint64_t round = 0;
    std::size_t producer = 0;
    workload::BlockWorkload work;
};

inline constexpr std::uint64_t kDefaultHopBound = 5;
inline constexpr std::size_t kDefaultSimShareSize = 64;

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    std::uint64_t rounds = 0;
    /// 0 means the diameter of the honest subgraph.
    std::uint64_t delta = 0;
    std::uint64_t hop_bound = kDefaultHopBound;
    std::size_t share_size = kDefaultSimShareSize;
    std::vector<NodeSpec> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<ProduceEvent> schedule;
    AdversarySpec adversary;

    /// Blocks carry an extended square when anyone samples.
    ValidityMode block_mode() const
    {
        for (const auto& n : nodes)
            if (n.rule == ValidityMode::Probabilistic) return ValidityMode::Probabilistic;
        return ValidityMode::Simplistic;
    }
};

namespace detail {

inline std::vector<std::string> tokens(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

inline std::uint64_t to_u64(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        auto v = std::stoull(s, &used);
        if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer '" + s + "' for " + what);
    }
}

inline double to_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad number '" + s + "' for " + what);
    }
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// "k=v" options after the positional tokens.
inline std::map<std::string, std::string> options(const std::vector<std::string>& toks, std::size_t from)
{
    std::map<std::string, std::string> out;
    for (std::size_t i = from; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + toks[i] + "'");
        out[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
    }
    return out;
}

inline ValidityMode parse_rule(const std::string& s)
{
    if (s == "simplistic") return ValidityMode::Simplistic;
    if (s == "probabilistic") return ValidityMode::Probabilistic;
    throw ConfigError("unknown validity rule '" + s + "'");
}

inline NodeKind parse_kind(const std::string& s)
{
    if (s == "consensus") return NodeKind::Consensus;
    if (s == "storage") return NodeKind::Storage;
    if (s == "client") return NodeKind::Client;
    throw ConfigError("unknown node kind '" + s + "'");
}

inline void reject_unknown(const std::map<std::string, std::string>& opts, std::initializer_list<const char*> known)
{
    for (const auto& [k, v] : opts) {
        bool ok = false;
        for (const char* n : known) ok = ok || k == n;
        if (!ok) throw ConfigError("unknown option '" + k + "'");
    }
}

} // namespace detail

inline ScenarioConfig parse_scenario(std::istream& in, std::string default_name = "scenario")
{
    ScenarioConfig cfg;
    cfg.name = std::move(default_name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (detail::tokens(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto key_toks = detail::tokens(line.substr(0, eq));
        auto val = detail::tokens(line.substr(eq + 1));
        if (key_toks.size() != 1 || val.empty()) throw ConfigError("line " + std::to_string(lineno) + ": malformed entry");
        const std::string& key = key_toks[0];
        try {
            if (key == "name") {
                cfg.name = val[0];
            } else if (key == "seed") {
                cfg.seed = detail::to_u64(val[0], key);
            } else if (key == "rounds") {
                cfg.rounds = detail::to_u64(val[0], key);
            } else if (key == "delta") {
                cfg.delta = detail::to_u64(val[0], key);
                if (cfg.delta == 0) throw ConfigError("delta must be at least 1");
            } else if (key == "hop_bound") {
                cfg.hop_bound = detail::to_u64(val[0], key);
            } else if (key == "share_size") {
                cfg.share_size = detail::to_u64(val[0], key);
            } else if (key == "node") {
                if (val.size() < 2) throw ConfigError("node needs an id and a kind");
                NodeSpec n;
                n.id = detail::to_u64(val[0], "node id");
                n.kind = detail::parse_kind(val[1]);
                auto opts = detail::options(val, 2);
                detail::reject_unknown(opts, {"honest", "stake", "rule", "samples", "apps"});
                if (opts.count("honest")) n.honest = detail::to_u64(opts["honest"], "honest") != 0;
                if (opts.count("stake")) n.stake = detail::to_double(opts["stake"], "stake");
                if (opts.count("rule")) n.rule = detail::parse_rule(opts["rule"]);
                if (opts.count("samples")) n.samples = detail::to_u64(opts["samples"], "samples");
                if (opts.count("apps"))
                    for (const auto& a : detail::split(opts["apps"], ',')) n.apps.push_back(workload::app_namespace(a));
                cfg.nodes.push_back(std::move(n));
            } else if (key == "edge") {
                if (val.size() != 2) throw ConfigError("edge needs two node ids");
                cfg.edges.emplace_back(detail::to_u64(val[0], "edge"), detail::to_u64(val[1], "edge"));
            } else if (key == "produce") {
                if (val.size() < 2) throw ConfigError("produce needs a round and a node");
                ProduceEvent e;
                e.round = detail::to_u64(val[0], "produce round");
                e.producer = detail::to_u64(val[1], "producer");
                auto opts = detail::options(val, 2);
                detail::reject_unknown(opts, {"transfers", "dummy", "dummy_size", "topups", "registrations",
                                                 "other_registrations", "fees", "other_topups"});
                auto get = [&](const char* k, std::size_t& field) {
                    if (opts.count(k)) field = detail::to_u64(opts[k], k);
                };
                get("transfers", e.work.transfers);
                get("dummy", e.work.dummy);
                get("dummy_size", e.work.dummy_size);
                get("topups", e.work.topups);
                get("registrations", e.work.registrations);
                get("other_registrations", e.work.other_registrations);
                get("fees", e.work.fees);
                get("other_topups", e.work.other_topups);
                cfg.schedule.push_back(e);
            } else if (key == "adversary") {
                AdversarySpec a;
                auto opts = detail::options(val, 1);
                if (val[0] == "none") {
                    detail::reject_unknown(opts, {});
                } else if (val[0] == "withhold") {
                    a.kind = AdversaryKind::Withhold;
                    detail::reject_unknown(opts, {"cells", "square"});
                    if (opts.count("square")) a.square = detail::to_u64(opts["square"], "square");
                    if (opts.count("cells")) {
                        for (const auto& c : detail::split(opts["cells"], ',')) {
                            auto rc = detail::split(c, ':');
                            if (rc.size() != 2) throw ConfigError("cell must be row:col, got '" + c + "'");
                            a.cells.push_back(CellIndex{detail::to_u64(rc[0], "row"), detail::to_u64(rc[1], "col")});
                        }
                    }
                } else if (val[0] == "bad_encoding") {
                    a.kind = AdversaryKind::BadEncoding;
                    detail::reject_unknown(opts, {"axis", "index"});
                    if (opts.count("axis")) {
                        if (opts["axis"] == "row") a.axis = Axis::Row;
                        else if (opts["axis"] == "column") a.axis = Axis::Column;
                        else throw ConfigError("axis must be row or column");
                    }
                    if (opts.count("index")) a.index = detail::to_u64(opts["index"], "index");
                } else if (val[0] == "omit_namespace") {
                    a.kind = AdversaryKind::OmitNamespace;
                    detail::reject_unknown(opts, {"app"});
                    if (!opts.count("app")) throw ConfigError("omit_namespace needs app=<name>");
                    a.ns = workload::app_namespace(opts["app"]);
                } else if (val[0] == "release_samples_only") {
                    a.kind = AdversaryKind::ReleaseSamplesOnly;
                    detail::reject_unknown(opts, {});
                } else {
                    throw ConfigError("unknown adversary '" + val[0] + "'");
                }
                cfg.adversary = a;
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario " + path.string());
    return parse_scenario(in, path.stem().string());
}

} // namespace daledger::netsim
