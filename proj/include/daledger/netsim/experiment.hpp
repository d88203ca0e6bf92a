#pragma once

// Seeded withholding experiment for the probabilistic rule: a dishonest
// producer hides an unrecoverable (k+1)^2 block of cells, one honest storage
// node sits in the middle of a star of samplers. Agreement breaks exactly
// when some sampler's cells all happen to be released.

#include <cmath>

#include "daledger/netsim/engine.hpp"

namespace daledger::netsim {

inline ScenarioConfig withholding_config(std::uint64_t seed, std::size_t samplers = 3, std::size_t samples = 2)
{
    ScenarioConfig cfg;
    cfg.name = "withhold-" + std::to_string(seed);
    cfg.seed = seed;
    cfg.rounds = 40;
    cfg.nodes.push_back(NodeSpec{0, NodeKind::Consensus, false, 1.0, {}, ValidityMode::Probabilistic, samples});
    cfg.nodes.push_back(NodeSpec{1, NodeKind::Storage, true, 0, {}, ValidityMode::Simplistic, samples});
    cfg.edges.emplace_back(0, 1);
    for (std::size_t i = 0; i < samplers; ++i) {
        cfg.nodes.push_back(NodeSpec{i + 2, NodeKind::Client, true, 0, {}, ValidityMode::Probabilistic, samples});
        cfg.edges.emplace_back(1, i + 2);
    }
    workload::BlockWorkload w;
    w.transfers = 3;
    cfg.schedule.push_back(ProduceEvent{0, 0, w});
    cfg.adversary.kind = AdversaryKind::Withhold;
    return cfg;
}

struct BoundCheck {
    std::size_t runs = 0;
    std::size_t agreement_violations = 0;
    std::size_t soundness_violations = 0;
    std::size_t k = 0;
    /// Probability that at least one sampler misses every withheld cell.
    double bound = 0;

    double frequency() const { return runs ? double(agreement_violations) / double(runs) : 0; }
    double standard_error() const { return runs ? std::sqrt(bound * (1 - bound) / double(runs)) : 0; }
    bool within() const { return frequency() <= bound + 3 * standard_error(); }
};

inline BoundCheck probabilistic_violation_check(std::size_t runs = 500, std::size_t samplers = 3, std::size_t samples = 2,
    std::uint64_t first_seed = 1)
{
    BoundCheck out;
    out.runs = runs;
    for (std::size_t r = 0; r < runs; ++r) {
        auto cfg = withholding_config(first_seed + r, samplers, samples);
        // Block width is fixed by the workload; size the withheld block to it.
        if (out.k == 0) {
            workload::Generator g(cfg.seed);
            out.k = make_block(genesis_header(), g.body(cfg.schedule[0].work, apps::PublicKey{}), ValidityMode::Probabilistic,
                SIZE_MAX, cfg.share_size)
                        .header.k;
        }
        cfg.adversary.square = out.k + 1;
        auto t = run_scenario(cfg);
        out.agreement_violations += !check_agreement(t);
        out.soundness_violations += !check_soundness(t);
    }
    auto n = static_cast<std::int64_t>(4 * out.k * out.k);
    auto w = static_cast<std::int64_t>((out.k + 1) * (out.k + 1));
    double miss = 1 - sampler::detection_probability(n, w, static_cast<std::int64_t>(samples));
    out.bound = 1 - std::pow(1 - miss, static_cast<double>(samplers));
    return out;
}

} // namespace daledger::netsim
