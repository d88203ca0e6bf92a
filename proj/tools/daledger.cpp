// daledger: benchmarks, sampling tables, scenario runs and chain archives.
// Exit codes: 0 ok, 2 bad configuration or output path, 3 trend or theorem check failed.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "daledger/netsim/engine.hpp"
#include "daledger/trends.hpp"

using namespace daledger;

namespace {

constexpr int kConfigExit = 2;
constexpr int kCheckExit = 3;

struct Common {
    bench::Options bench;
    std::string out;
    bool no_check = false;
};

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file_.emplace(path);
        if (!*file_) throw IoError("cannot open " + path + " for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    void close()
    {
        if (!file_) return;
        file_->close();
        if (file_->fail()) throw IoError("failed writing output");
    }

private:
    std::optional<std::ofstream> file_;
};

template <class Rows>
void emit(const Common& c, const Rows& rows)
{
    Output out(c.out);
    bench::write_csv(out.stream(), rows);
    out.close();
}

template <class Check>
int judge(const Common& c, Check check)
{
    if (c.no_check) return 0;
    trends::Verdict v = check();
    std::cerr << (v.pass ? "trend ok: " : "trend FAILED: ") << v.detail << "\n";
    return v.pass ? 0 : kCheckExit;
}

std::vector<std::size_t> or_default(const std::vector<std::size_t>& xs, std::vector<std::size_t> fallback)
{
    auto v = xs.empty() ? std::move(fallback) : xs;
    bench::check_sweep(v);
    return v;
}

std::vector<std::size_t> dummy_sweep()
{
    std::vector<std::size_t> xs{0};
    for (auto x : bench::doubling(1024, 1024 * 1024)) xs.push_back(x);
    return xs;
}

ValidityMode parse_mode(const std::string& s)
{
    if (s == "simplistic") return ValidityMode::Simplistic;
    if (s == "probabilistic") return ValidityMode::Probabilistic;
    throw ConfigError("unknown mode " + s);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"data-availability ledger harness"};
    app.require_subcommand(1);
    Common c;
    app.add_option("--seed", c.bench.seed, "workload seed")->capture_default_str();
    app.add_option("--out", c.out, "output file (default stdout)");
    app.add_option("--share-size", c.bench.share_size, "share payload size in bytes (0 = command default)");
    app.add_option("--samples", c.bench.samples, "samples per light client")->capture_default_str();
    app.add_option("--max-leaf-size", c.bench.max_leaf_size, "largest message stored in one leaf")->capture_default_str();
    app.add_flag("--no-check", c.no_check, "skip the trend check on the results");

    std::vector<std::size_t> sweep;
    auto* validity = app.add_subcommand("bench-validity", "bytes each validity rule downloads per block size");
    validity->add_option("--sweep", sweep, "block sizes in bytes (default 32 KiB doubling to 4 MiB)")->delimiter(',');
    auto* proof = app.add_subcommand("bench-proofsize", "currency response size against irrelevant data");
    proof->add_option("--sweep", sweep, "dummy bytes (default 0 then 1 KiB doubling to 1 MiB)")->delimiter(',');
    auto* state = app.add_subcommand("bench-statesize", "currency state against total state");
    state->add_option("--sweep", sweep, "dummy bytes (default 0 then 1 KiB doubling to 1 MiB)")->delimiter(',');

    auto* registrar = app.add_subcommand("bench-registrar", "registrar response size against other instances' traffic");
    std::string tx_kind;
    std::string mode_name = "simplistic";
    registrar->add_option("kind", tx_kind, "topup or register")->required()->check(CLI::IsMember({"topup", "register"}));
    registrar->add_option("--sweep", sweep, "other transactions (default 0 to 500 step 25)")->delimiter(',');
    registrar->add_option("--mode", mode_name, "block validity mode")->check(CLI::IsMember({"simplistic", "probabilistic"}));

    auto* table = app.add_subcommand("sampling-table", "samples per client for a stake fraction");
    std::vector<std::int64_t> ns{64, 256, 1024, 4096};
    std::vector<double> ms{0.5, 0.25, 0.125};
    double h = 0.5, p = 0.99;
    std::optional<std::int64_t> lambda;
    table->add_option("--n", ns, "cells in the extended square")->delimiter(',')->capture_default_str();
    table->add_option("--stake", ms, "client stake fractions")->delimiter(',')->capture_default_str();
    table->add_option("--honest", h, "honest stake")->capture_default_str();
    table->add_option("--target", p, "target probability")->capture_default_str();
    table->add_option("--lambda", lambda, "fixed lambda instead of (k+1)^2-1 for n=4k^2");

    auto* scenario = app.add_subcommand("run-scenario", "run a network scenario and print its trace CSV");
    std::string scenario_path;
    bool require = false;
    scenario->add_option("config", scenario_path, "scenario file")->required();
    scenario->add_flag("--require-theorems", require, "exit 3 if soundness or agreement fails");

    auto* chain = app.add_subcommand("make-chain", "write a chain of generated blocks to an archive");
    std::size_t blocks = 10, transfers = 10, dummy = 0, dummy_size = 1024;
    chain->add_option("--blocks", blocks)->capture_default_str();
    chain->add_option("--transfers", transfers, "currency transfers per block")->capture_default_str();
    chain->add_option("--dummy", dummy, "dummy messages per block")->capture_default_str();
    chain->add_option("--dummy-size", dummy_size)->capture_default_str();
    chain->add_option("--mode", mode_name)->check(CLI::IsMember({"simplistic", "probabilistic"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        if (*validity) {
            auto rows = bench::validity(or_default(sweep, bench::doubling(32 * 1024, 4 * 1024 * 1024)), c.bench);
            emit(c, rows);
            return judge(c, [&] { return trends::validity(rows); });
        }
        if (*proof) {
            auto rows = bench::proof_size(or_default(sweep, dummy_sweep()), c.bench);
            emit(c, rows);
            return judge(c, [&] { return trends::proof_size(rows); });
        }
        if (*state) {
            auto rows = bench::state_size(or_default(sweep, dummy_sweep()), c.bench);
            emit(c, rows);
            return judge(c, [&] { return trends::state_size(rows); });
        }
        if (*registrar) {
            std::vector<std::size_t> xs;
            for (std::size_t x = 0; x <= 500; x += 25) xs.push_back(x);
            auto kind = tx_kind == "topup" ? bench::RegistrarTx::TopUp : bench::RegistrarTx::Register;
            auto rows = bench::registrar(kind, or_default(sweep, xs), c.bench, parse_mode(mode_name));
            emit(c, rows);
            return judge(c, [&] { return kind == bench::RegistrarTx::TopUp ? trends::topup(rows) : trends::registration(rows); });
        }
        if (*table) {
            std::function<std::int64_t(std::int64_t)> rule = bench::square_lambda_for;
            if (lambda) rule = [l = *lambda](std::int64_t) { return l; };
            auto rows = bench::sampling_table(ns, rule, h, p, ms);
            emit(c, rows);
            return judge(c, [&] { return trends::sampling(rows); });
        }
        if (*scenario) {
            auto trace = netsim::run_scenario(netsim::load_scenario(scenario_path));
            Output out(c.out);
            trace.write_csv(out.stream());
            out.close();
            bool sound = netsim::check_soundness(trace), agree = netsim::check_agreement(trace);
            std::cerr << "soundness: " << (sound ? "holds" : "violated") << "\nagreement: " << (agree ? "holds" : "violated")
                      << "\n";
            return require && !(sound && agree) ? kCheckExit : 0;
        }
        if (*chain) {
            if (c.out.empty()) throw ConfigError("make-chain needs --out");
            workload::Generator gen(c.bench.seed);
            auto mode = parse_mode(mode_name);
            std::vector<Block> out;
            BlockHeader parent = genesis_header();
            for (std::size_t i = 0; i < blocks; ++i) {
                auto body = gen.body({.transfers = transfers, .dummy = dummy, .dummy_size = dummy_size});
                out.push_back(make_block(parent, std::move(body), mode, c.bench.max_leaf_size,
                    bench::share_size_or(c.bench, kDefaultSharePayloadSize)));
                parent = out.back().header;
            }
            write_archive(c.out, out);
            std::cerr << "wrote " << out.size() << " blocks\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kConfigExit;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigExit;
    }
    return 0;
}
