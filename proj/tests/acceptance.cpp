// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is 0 when the failing set equals the --known-failure set.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "coding_oracles.hpp"
#include "daledger/netsim/experiment.hpp"
#include "daledger/trends.hpp"
#include "nmt_oracles.hpp"

using namespace daledger;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Outcome sampling_guarantee()
{
    auto t0 = Clock::now();
    std::int64_t k = 32;
    double p = sampler::detection_probability(4 * k * k, (k + 1) * (k + 1), 15);
    double mc = sampler::monte_carlo_detection(4096, 1089, 15, 1'000'000, 2024);
    double t = seconds_since(t0);
    std::ostringstream d;
    d << "detection(4096,1089,15)=" << p << ", Monte Carlo 10^6 = " << mc << ", " << t << "s";
    return {p >= 0.99 && std::fabs(mc - p) <= 0.002 && t < 10, d.str()};
}

Outcome fraud_proof_size()
{
    auto t0 = Clock::now();
    workload::Generator g(1);
    auto blk = make_block(genesis_header(), bench::dummy_fill(g, 1 << 20, 1024), ValidityMode::Probabilistic,
        nmt::kDefaultMaxLeafSize, kDefaultSharePayloadSize);
    auto& sq = *blk.square;
    sq.cell(0, sq.width() - 1)->data[0] ^= 1;
    sq.commit();
    auto proof = find_coding_fraud(sq);
    double t = seconds_since(t0);
    if (!proof || !verify_coding_fraud_proof(sq.row_roots, sq.col_roots, *proof)) return {false, "no valid fraud proof found"};
    double size = double(proof->serialized_size());
    double target = 26'000;
    std::ostringstream d;
    d << "k=" << sq.k << ", proof " << size << " B against " << target << " B +-20%, " << t << "s";
    return {std::fabs(size - target) <= 0.2 * target && t < 30, d.str()};
}

Outcome validity_scaling()
{
    auto t0 = Clock::now();
    auto v = trends::validity(bench::validity(bench::doubling(32 * 1024, 4 * 1024 * 1024)));
    double t = seconds_since(t0);
    return {v.pass && t < 60, v.detail + ", " + std::to_string(t) + "s"};
}

std::vector<std::size_t> dummy_sweep()
{
    std::vector<std::size_t> xs{0};
    for (auto x : bench::doubling(1024, 1024 * 1024)) xs.push_back(x);
    return xs;
}

Outcome proof_scaling()
{
    auto v = trends::proof_size(bench::proof_size(dummy_sweep()));
    return {v.pass, v.detail};
}

Outcome state_sovereignty()
{
    auto v = trends::state_size(bench::state_size(dummy_sweep()));
    return {v.pass, v.detail};
}

Outcome dependency_asymmetry()
{
    std::vector<std::size_t> xs;
    for (std::size_t x = 0; x <= 500; x += 25) xs.push_back(x);
    auto a = trends::topup(bench::registrar(bench::RegistrarTx::TopUp, xs));
    auto b = trends::registration(bench::registrar(bench::RegistrarTx::Register, xs));
    return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Outcome nmt_completeness()
{
    auto t0 = Clock::now();
    auto small = daledger::testing::exhaustive_completeness(8, 8);
    auto large = daledger::testing::randomized_completeness(10'000, 64, 7);
    double t = seconds_since(t0);
    std::ostringstream d;
    d << small.trees << " small trees, " << small.presentations << " presentations, " << small.false_accepts
      << " false accepts; " << large.trees << " random 64-leaf trees, " << large.false_accepts << " false accepts; " << t << "s";
    bool ok = small.false_accepts == 0 && small.honest_rejects == 0 && large.false_accepts == 0 && large.honest_rejects == 0;
    return {ok && t < 120, d.str()};
}

std::vector<std::filesystem::path> corpus(const std::string& dir)
{
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".txt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

Outcome simplistic_theorems(const std::string& dir)
{
    auto files = corpus(dir);
    std::size_t simplistic = 0, withholding = 0, broken = 0;
    for (const auto& f : files) {
        auto cfg = netsim::load_scenario(f);
        withholding += cfg.adversary.kind == netsim::AdversaryKind::Withhold
            || cfg.adversary.kind == netsim::AdversaryKind::ReleaseSamplesOnly;
        auto t = netsim::run_scenario(cfg);
        if (t.mode != ValidityMode::Simplistic) continue;
        ++simplistic;
        if (!netsim::check_soundness(t) || !netsim::check_agreement(t)) {
            ++broken;
            std::cerr << "  theorem violated in " << f.filename().string() << "\n";
        }
    }
    auto b = netsim::probabilistic_violation_check(500);
    std::ostringstream d;
    d << files.size() << " scenarios (" << withholding << " withholding), " << simplistic << " simplistic traces, " << broken
      << " violations; probabilistic 500 runs: violation frequency " << b.frequency() << " <= bound " << b.bound << " + 3*"
      << b.standard_error();
    return {files.size() >= 20 && withholding > 0 && broken == 0 && b.within(), d.str()};
}

Outcome coverage_math()
{
    std::size_t points = 0;
    double worst = 0;
    std::uint64_t seed = 100;
    for (auto [n, lambda, s, c] : {std::tuple{8, 1, 2, 3}, std::tuple{8, 3, 3, 2}, std::tuple{8, 2, 4, 1}, std::tuple{8, 0, 5, 4},
             std::tuple{12, 4, 3, 4}, std::tuple{12, 2, 6, 2}, std::tuple{12, 6, 2, 5}, std::tuple{16, 3, 4, 5},
             std::tuple{16, 5, 6, 2}, std::tuple{16, 8, 3, 3}, std::tuple{16, 1, 8, 4}, std::tuple{20, 6, 5, 4},
             std::tuple{20, 10, 4, 2}, std::tuple{24, 8, 6, 3}, std::tuple{24, 4, 10, 3}, std::tuple{24, 12, 5, 2},
             std::tuple{28, 9, 7, 3}, std::tuple{32, 10, 8, 3}, std::tuple{32, 16, 6, 2}, std::tuple{32, 6, 12, 4}}) {
        double exact = sampler::euler_coverage(n, lambda, s, c).value;
        double mc = sampler::monte_carlo_coverage(n, lambda, s, c, 200'000, seed++);
        worst = std::max(worst, std::fabs(exact - mc));
        ++points;
    }
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_product = 0;
    for (int t = 0; t < 100; ++t) {
        double h = 0.2 + 0.8 * u(rng);
        std::size_t parts = 1 + rng() % 6;
        std::vector<double> cuts{0.0, 1.0};
        for (std::size_t j = 1; j < parts; ++j) cuts.push_back(u(rng));
        std::sort(cuts.begin(), cuts.end());
        double w = 0.001 + 0.998 * u(rng);
        double product = 1.0;
        for (std::size_t j = 0; j < parts; ++j) product *= sampler::stake_miss_probability(w, h * (cuts[j + 1] - cuts[j]), h);
        worst_product = std::max(worst_product, std::fabs(product - w));
    }
    std::size_t minimal = 0, checked = 0;
    for (std::int64_t n : {16, 32, 64})
        for (std::int64_t lambda : {n / 8, n / 4, n / 2})
            for (double p : {0.5, 0.9, 0.99})
                for (double m : {0.5, 0.25, 0.125}) {
                    auto s = sampler::required_samples_for_stake({n, lambda, 0.5, m, p});
                    double c = 0.5 / m;
                    ++checked;
                    bool ok = sampler::euler_coverage(n, lambda, s, c).value >= p
                        && (s == 0 || sampler::euler_coverage(n, lambda, s - 1, c).value < p);
                    minimal += ok;
                }
    std::ostringstream d;
    d << "coverage vs Monte Carlo worst |diff| " << worst << " over " << points << " points; product identity worst "
      << worst_product << "; " << minimal << "/" << checked << " sample counts minimal";
    return {worst <= 0.005 && worst_product <= 1e-12 && minimal == checked, d.str()};
}

Outcome reconstruction()
{
    std::ostringstream d;
    bool ok = true;
    for (std::size_t k : {1, 2, 4}) {
        auto t = daledger::testing::reconstruction_threshold(k, 1000, 90 + k);
        d << "k=" << k << ": " << t.disagreements << " disagreements, " << t.recoverable << " recoverable, " << t.inexact
          << " inexact; ";
        ok = ok && t.disagreements == 0 && t.inexact == 0 && t.patterns == 1000;
    }
    return {ok, d.str()};
}

Outcome app_oracles(const std::string& dir)
{
    std::size_t clients = 0, mismatched = 0, foreign = 0;
    for (const auto& f : corpus(dir)) {
        auto t = netsim::run_scenario(netsim::load_scenario(f));
        for (const auto& a : t.apps) {
            ++clients;
            if (!a.matches_oracle()) {
                ++mismatched;
                std::cerr << "  " << f.filename().string() << " node " << a.node << " differs from replay\n";
            }
            foreign += a.foreign_leaf_bytes;
        }
    }
    std::ostringstream d;
    d << clients << " clients, " << mismatched << " differ from replay, " << foreign << " bytes outside app+dependencies";
    return {clients > 0 && mismatched == 0 && foreign == 0, d.str()};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance criteria"};
    std::vector<int> known;
    std::string dir = DALEDGER_SCENARIO_DIR;
    app.add_option("--known-failure", known, "criteria expected to fail");
    app.add_option("--scenarios", dir, "scenario corpus directory");
    CLI11_PARSE(app, argc, argv);

    std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"sampling guarantee", sampling_guarantee},
        {"fraud proof size", fraud_proof_size},
        {"validity rule scaling", validity_scaling},
        {"proof size scaling", proof_scaling},
        {"state sovereignty", state_sovereignty},
        {"dependency cost asymmetry", dependency_asymmetry},
        {"namespace completeness", nmt_completeness},
        {"soundness and agreement", [&] { return simplistic_theorems(dir); }},
        {"coverage mathematics", coverage_math},
        {"reconstruction threshold", reconstruction},
        {"application oracle equivalence", [&] { return app_oracles(dir); }},
    };
    std::set<int> failed;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        int id = static_cast<int>(i + 1);
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) failed.insert(id);
        std::cout << "criterion " << id << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail
                  << std::endl;
    }
    std::set<int> expected(known.begin(), known.end());
    std::cout << criteria.size() - failed.size() << "/" << criteria.size() << " criteria pass";
    if (!expected.empty()) std::cout << ", known failures as expected: " << (failed == expected ? "yes" : "no");
    std::cout << std::endl;
    return failed == expected ? 0 : 1;
}
