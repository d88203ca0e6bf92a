#pragma once

// Trend checks over benchmark rows, as fit-quality thresholds.

#include <sstream>

#include "daledger/bench.hpp"
#include "daledger/fit.hpp"

namespace daledger::trends {

struct Verdict {
    bool pass = false;
    std::string detail;
};

/// Simplistic bytes on a line through the origin; probabilistic bytes far
/// from linear between the smallest and largest block.
inline Verdict validity(const std::vector<bench::ValidityRow>& rows, double min_r2 = 0.999, double max_ratio = 8)
{
    std::vector<double> x, y;
    for (const auto& r : rows) x.push_back(double(r.block_size)), y.push_back(double(r.simplistic_bytes));
    auto f = fit::through_origin(x, y);
    double ratio = double(rows.back().probabilistic_bytes) / double(rows.front().probabilistic_bytes);
    std::ostringstream d;
    d << "simplistic R^2=" << f.r2() << ", probabilistic " << rows.back().block_size << "B/" << rows.front().block_size
      << "B ratio=" << ratio << " (linear would be " << double(rows.back().block_size) / double(rows.front().block_size) << ")";
    return {f.r2() >= min_r2 && ratio < max_ratio, d.str()};
}

/// Log model (scale profiled, so one extra parameter) against a straight line.
struct LogVsLinear {
    double aic_linear = 0;
    double aic_log = 0;
    double scale = 1;
    bool log_wins() const { return aic_log < aic_linear; }
};

inline LogVsLinear log_vs_linear(const std::vector<double>& x, const std::vector<double>& y)
{
    auto lin = fit::linear(x, y);
    auto log = fit::best_logarithmic(x, y);
    return {lin.aic(), log.fit.aic() + 2, log.scale};
}

inline Verdict proof_size(const std::vector<bench::ProofRow>& rows)
{
    std::vector<double> x, s, p;
    bool below = true;
    for (const auto& r : rows) {
        x.push_back(double(r.dummy_bytes));
        s.push_back(double(r.simplistic_response));
        p.push_back(double(r.probabilistic_response));
        below = below && r.probabilistic_response < r.simplistic_response;
    }
    auto a = log_vs_linear(x, s);
    auto b = log_vs_linear(x, p);
    std::ostringstream d;
    d << "AIC log/linear simplistic " << a.aic_log << "/" << a.aic_linear << ", probabilistic " << b.aic_log << "/"
      << b.aic_linear << ", probabilistic below simplistic at every x: " << (below ? "yes" : "no");
    return {a.log_wins() && b.log_wins() && below, d.str()};
}

inline Verdict state_size(const std::vector<bench::StateRow>& rows)
{
    bool constant = true, grows = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        constant = constant && rows[i].currency_entries == rows[0].currency_entries;
        grows = grows && rows[i].total_bytes > rows[i - 1].total_bytes;
    }
    std::ostringstream d;
    d << "currency entries " << rows.front().currency_entries << ".." << rows.back().currency_entries << ", total entries "
      << rows.front().total_entries << ".." << rows.back().total_entries;
    return {constant && grows, d.str()};
}

inline Verdict topup(const std::vector<bench::RegistrarRow>& rows, double min_r2 = 0.95)
{
    std::vector<double> x, y;
    for (const auto& r : rows) x.push_back(double(r.other)), y.push_back(double(r.response_bytes));
    auto f = fit::linear(x, y);
    std::ostringstream d;
    d << "top-up linear R^2=" << f.r2() << " slope=" << f.coef[1] << " B/tx";
    return {f.r2() >= min_r2 && f.coef[1] > 0, d.str()};
}

/// The linear slope adds nothing significant on top of the log model.
inline Verdict registration(const std::vector<bench::RegistrarRow>& rows, double alpha = 0.05)
{
    std::vector<double> x, y;
    for (const auto& r : rows) x.push_back(double(r.other)), y.push_back(double(r.response_bytes));
    auto n = fit::linear_term_over_log(x, y);
    std::ostringstream d;
    d << "registration slope " << n.fit.coef[1] << " B/tx over log (scale " << n.scale << "): t=" << n.t << " p=" << n.p;
    return {n.p > alpha, d.str()};
}

inline Verdict sampling(const std::vector<bench::SamplingRow>& rows)
{
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.coverage >= r.p && (r.s == 0 || r.coverage_below < r.p);
        ok = ok && sampler::euler_coverage(r.n, r.lambda, r.s, r.c).value == r.coverage;
    }
    return {ok, std::to_string(rows.size()) + " rows minimal and re-verified"};
}

} // namespace daledger::trends
