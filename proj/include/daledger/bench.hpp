#pragma once

// Benchmarks: bytes each validity rule downloads, application response
// sizes against irrelevant data, state sizes, and registrar dependency
// traffic. Every row is computed from real blocks and real sync clients.

#include <ostream>
#include <random>

#include "daledger/apps/sync.hpp"
#include "daledger/workload.hpp"

namespace daledger::bench {

struct Options {
    std::uint64_t seed = 1;
    /// 0 picks the benchmark's own default.
    std::size_t share_size = 0;
    std::size_t samples = sampler::kDefaultSampleCount;
    std::size_t max_leaf_size = nmt::kDefaultMaxLeafSize;
    std::size_t dummy_size = 1024;
};

// 225 B shares cap a square at about 3.5 MB, short of the 4 MB sweep.
inline constexpr std::size_t kValidityShareSize = 512;
inline constexpr std::size_t kFixedMessages = 10;

inline std::size_t share_size_or(const Options& o, std::size_t fallback) { return o.share_size ? o.share_size : fallback; }

/// from, 2 from, 4 from, ... up to `to`.
inline std::vector<std::size_t> doubling(std::size_t from, std::size_t to)
{
    if (from == 0 || to < from) throw ConfigError("doubling sweep needs 0 < from <= to");
    std::vector<std::size_t> out;
    for (std::size_t x = from; x <= to; x *= 2) out.push_back(x);
    return out;
}

inline void check_sweep(const std::vector<std::size_t>& xs)
{
    if (xs.empty()) throw ConfigError("sweep is empty");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] <= xs[i - 1]) throw ConfigError("sweep must be strictly increasing");
}

/// Dummy messages whose payloads add up to exactly `bytes` (bytes must be
/// 0 or at least the dummy header size).
inline std::vector<nmt::Message> dummy_fill(workload::Generator& g, std::size_t bytes, std::size_t dummy_size)
{
    constexpr std::size_t kMin = 10;
    if (dummy_size < kMin) throw ConfigError("dummy size below the dummy message header");
    std::vector<nmt::Message> out;
    if (bytes == 0) return out;
    if (bytes < kMin) throw ConfigError("dummy byte count below one dummy message");
    std::size_t full = bytes / dummy_size;
    std::size_t rest = bytes % dummy_size;
    if (rest && rest < kMin) {
        // Fold a short tail into the last message.
        --full;
        rest += dummy_size;
    }
    workload::BlockWorkload w;
    w.dummy = full;
    w.dummy_size = dummy_size;
    out = g.body(w);
    if (rest) {
        w.dummy = 1;
        w.dummy_size = rest;
        for (auto& m : g.body(w)) out.push_back(std::move(m));
    }
    return out;
}

/// Bytes a sampler downloads: header, all line roots, and s samples.
inline std::uint64_t probabilistic_download(const Block& blk, std::size_t samples, std::uint64_t seed)
{
    if (!blk.square) throw Error("probabilistic download needs an extended square");
    std::mt19937_64 rng(seed);
    std::uint64_t bytes = BlockHeader::kEncodedSize + blk.square->line_roots().size() * nmt::kDigestSize;
    for (auto at : draw_cells(rng, blk.square->k, samples)) bytes += answer_sample(*blk.square, at).serialized_size();
    return bytes;
}

/// Bytes a simplistic validator downloads: the whole block.
inline std::uint64_t simplistic_download(const Block& blk) { return blk.encode().size(); }

struct ValidityRow {
    std::size_t block_size = 0;
    std::size_t k = 0;
    std::uint64_t simplistic_bytes = 0;
    std::uint64_t probabilistic_bytes = 0;
};

inline std::vector<ValidityRow> validity(const std::vector<std::size_t>& sizes, const Options& o = {})
{
    check_sweep(sizes);
    std::vector<ValidityRow> rows;
    for (auto size : sizes) {
        workload::Generator g(o.seed);
        auto body = dummy_fill(g, size, o.dummy_size);
        ValidityRow r;
        r.block_size = size;
        r.simplistic_bytes = simplistic_download(make_block(genesis_header(), body, ValidityMode::Simplistic, o.max_leaf_size));
        auto blk = make_block(genesis_header(), std::move(body), ValidityMode::Probabilistic, o.max_leaf_size,
            share_size_or(o, kValidityShareSize));
        r.k = blk.square->k;
        r.probabilistic_bytes = probabilistic_download(blk, o.samples, o.seed);
        rows.push_back(r);
    }
    return rows;
}

/// What one client downloads to sync `app` for a single block.
inline apps::DownloadStats app_download(const workload::Generator& g, nmt::NamespaceId app, const Block& blk)
{
    apps::ArchivePeer peer;
    peer.add(blk);
    apps::StoragePeer* peers[] = {&peer};
    apps::AppClient client(g.registry(), app);
    client.sync_block(apps::AcceptedBlock::of(blk), peers);
    return client.stats();
}

struct ProofRow {
    std::size_t dummy_bytes = 0;
    /// Whole namespace response: messages or shares plus proofs.
    std::size_t simplistic_response = 0;
    std::size_t probabilistic_response = 0;
    std::size_t simplistic_proof = 0;
    std::size_t probabilistic_proof = 0;
};

inline std::vector<nmt::Message> currency_with_dummy(workload::Generator& g, std::size_t dummy_bytes, const Options& o)
{
    workload::BlockWorkload w;
    w.transfers = kFixedMessages;
    auto body = g.body(w);
    for (auto& m : dummy_fill(g, dummy_bytes, o.dummy_size)) body.push_back(std::move(m));
    return body;
}

inline std::vector<ProofRow> proof_size(const std::vector<std::size_t>& dummy_bytes, const Options& o = {})
{
    check_sweep(dummy_bytes);
    std::vector<ProofRow> rows;
    for (auto x : dummy_bytes) {
        workload::Generator g(o.seed);
        auto body = currency_with_dummy(g, x, o);
        ProofRow r;
        r.dummy_bytes = x;
        auto simple = app_download(g, workload::kCurrencyNs,
            make_block(genesis_header(), body, ValidityMode::Simplistic, o.max_leaf_size));
        auto prob = app_download(g, workload::kCurrencyNs,
            make_block(genesis_header(), std::move(body), ValidityMode::Probabilistic, o.max_leaf_size,
                share_size_or(o, kDefaultSharePayloadSize)));
        r.simplistic_response = simple.total();
        r.simplistic_proof = simple.proof_bytes;
        r.probabilistic_response = prob.total();
        r.probabilistic_proof = prob.proof_bytes;
        rows.push_back(r);
    }
    return rows;
}

struct StateRow {
    std::size_t dummy_bytes = 0;
    std::size_t currency_entries = 0;
    std::size_t currency_bytes = 0;
    std::size_t total_entries = 0;
    std::size_t total_bytes = 0;
};

/// Currency client state after syncing a block with 10 transfers and
/// growing dummy data; totals also count the dummy application's state.
inline std::vector<StateRow> state_size(const std::vector<std::size_t>& dummy_bytes, const Options& o = {})
{
    check_sweep(dummy_bytes);
    std::vector<StateRow> rows;
    for (auto x : dummy_bytes) {
        workload::Generator g(o.seed);
        auto blk = make_block(genesis_header(), currency_with_dummy(g, x, o), ValidityMode::Simplistic, o.max_leaf_size);
        apps::ArchivePeer peer;
        peer.add(blk);
        apps::StoragePeer* peers[] = {&peer};
        apps::AppClient currency(g.registry(), workload::kCurrencyNs);
        currency.sync_block(apps::AcceptedBlock::of(blk), peers);
        apps::AppClient dummy(g.registry(), workload::kDummyNs);
        dummy.sync_block(apps::AcceptedBlock::of(blk), peers);
        StateRow r;
        r.dummy_bytes = x;
        r.currency_entries = currency.state().entry_count();
        r.currency_bytes = currency.state().byte_size();
        r.total_entries = r.currency_entries + dummy.state().entry_count();
        r.total_bytes = r.currency_bytes + dummy.state().byte_size();
        rows.push_back(r);
    }
    return rows;
}

enum class RegistrarTx { TopUp, Register };

struct RegistrarRow {
    std::size_t other = 0;
    std::size_t response_bytes = 0;
    std::size_t proof_bytes = 0;
    std::size_t leaf_bytes = 0;
    /// Part of the leaf bytes that came from the currency dependency.
    std::size_t currency_leaf_bytes = 0;
};

/// Sync cost for one registrar instance holding 10 transactions of the
/// given kind while `other` such transactions go to other instances.
inline std::vector<RegistrarRow> registrar(RegistrarTx kind, const std::vector<std::size_t>& other, const Options& o = {},
    ValidityMode mode = ValidityMode::Simplistic)
{
    check_sweep(other);
    std::vector<RegistrarRow> rows;
    for (auto x : other) {
        workload::Generator g(o.seed);
        workload::BlockWorkload w;
        if (kind == RegistrarTx::TopUp) {
            w.topups = kFixedMessages;
            w.other_topups = x;
        } else {
            w.registrations = kFixedMessages;
            w.other_registrations = x;
        }
        auto blk = make_block(genesis_header(), g.body(w), mode, o.max_leaf_size, share_size_or(o, kDefaultSharePayloadSize));
        auto stats = app_download(g, workload::kRegistrarNs, blk);
        RegistrarRow r;
        r.other = x;
        r.response_bytes = stats.total();
        r.proof_bytes = stats.proof_bytes;
        r.leaf_bytes = stats.total_leaf_bytes();
        auto it = stats.leaf_bytes.find(workload::kCurrencyNs);
        r.currency_leaf_bytes = it == stats.leaf_bytes.end() ? 0 : it->second;
        rows.push_back(r);
    }
    return rows;
}

struct SamplingRow {
    std::int64_t n = 0;
    /// Original square width when n = 4k^2, else 0.
    std::int64_t k = 0;
    std::int64_t lambda = 0;
    double h = 0;
    double m = 0;
    double p = 0;
    double c = 0;
    std::int64_t s = 0;
    double coverage = 0;
    double coverage_below = 0;
    /// Fewest samples one client needs to catch an unrecoverable
    /// withholding of lambda+1 cells with probability p.
    std::int64_t detect_s = 0;
};

/// Unrecoverable threshold minus one for a square of n = 4k^2 cells.
inline std::int64_t square_lambda_for(std::int64_t n)
{
    auto k = static_cast<std::int64_t>(std::llround(std::sqrt(double(n) / 4)));
    if (4 * k * k != n) throw ConfigError("n=" + std::to_string(n) + " is not an extended square size 4k^2");
    return sampler::square_lambda(k);
}

inline std::vector<SamplingRow> sampling_table(const std::vector<std::int64_t>& ns, const std::function<std::int64_t(std::int64_t)>& lambda_rule,
    double h, double p, const std::vector<double>& ms)
{
    std::vector<SamplingRow> rows;
    for (auto n : ns) {
        auto lambda = lambda_rule(n);
        std::int64_t detect = 0;
        while (detect < n && sampler::detection_probability(n, lambda + 1, detect) < p) ++detect;
        for (auto m : ms) {
            auto k = static_cast<std::int64_t>(std::llround(std::sqrt(double(n) / 4)));
            SamplingRow r{n, 4 * k * k == n ? k : 0, lambda, h, m, p, h / m, 0, 0, 0, detect};
            r.s = sampler::required_samples_for_stake({n, lambda, h, m, p});
            r.coverage = sampler::euler_coverage(n, lambda, r.s, r.c).value;
            r.coverage_below = r.s > 0 ? sampler::euler_coverage(n, lambda, r.s - 1, r.c).value : 0;
            rows.push_back(r);
        }
    }
    return rows;
}

// CSV writers, columns fixed.

inline void write_csv(std::ostream& out, const std::vector<ValidityRow>& rows)
{
    out << "block_size,k,simplistic_bytes,probabilistic_bytes\n";
    for (const auto& r : rows) out << r.block_size << ',' << r.k << ',' << r.simplistic_bytes << ',' << r.probabilistic_bytes << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<ProofRow>& rows)
{
    out << "dummy_bytes,simplistic_response,probabilistic_response,simplistic_proof,probabilistic_proof\n";
    for (const auto& r : rows) {
        out << r.dummy_bytes << ',' << r.simplistic_response << ',' << r.probabilistic_response << ',' << r.simplistic_proof
            << ',' << r.probabilistic_proof << '\n';
    }
}

inline void write_csv(std::ostream& out, const std::vector<StateRow>& rows)
{
    out << "dummy_bytes,currency_entries,currency_bytes,total_entries,total_bytes\n";
    for (const auto& r : rows) {
        out << r.dummy_bytes << ',' << r.currency_entries << ',' << r.currency_bytes << ',' << r.total_entries << ','
            << r.total_bytes << '\n';
    }
}

inline void write_csv(std::ostream& out, const std::vector<RegistrarRow>& rows)
{
    out << "other_transactions,response_bytes,proof_bytes,leaf_bytes,currency_leaf_bytes\n";
    for (const auto& r : rows) {
        out << r.other << ',' << r.response_bytes << ',' << r.proof_bytes << ',' << r.leaf_bytes << ',' << r.currency_leaf_bytes
            << '\n';
    }
}

inline void write_csv(std::ostream& out, const std::vector<SamplingRow>& rows)
{
    out << "n,k,lambda,h,m,p,c,s,coverage,coverage_at_s_minus_1,detect_s\n";
    auto old = out.precision(12);
    for (const auto& r : rows) {
        out << r.n << ',' << r.k << ',' << r.lambda << ',' << r.h << ',' << r.m << ',' << r.p << ',' << r.c << ',' << r.s << ','
            << r.coverage << ',' << r.coverage_below << ',' << r.detect_s << '\n';
    }
    out.precision(old);
}

} // namespace daledger::bench
