#pragma once

// Sample selection and the probability mathematics behind it.

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "daledger/errors.hpp"

namespace daledger::sampler {

inline constexpr std::size_t kDefaultSampleCount = 15;

/// s distinct positions in [0, n), uniform over subsets (Floyd's algorithm).
template <class Rng>
std::vector<std::size_t> draw_samples(Rng& rng, std::size_t n, std::size_t s)
{
    if (s > n) throw DomainError("cannot draw " + std::to_string(s) + " distinct samples from " + std::to_string(n));
    std::vector<std::size_t> out;
    out.reserve(s);
    std::unordered_set<std::size_t> seen;
    for (std::size_t j = n - s; j < n; ++j) {
        std::uniform_int_distribution<std::size_t> dist(0, j);
        std::size_t t = dist(rng);
        if (seen.insert(t).second) {
            out.push_back(t);
        } else {
            seen.insert(j);
            out.push_back(j);
        }
    }
    return out;
}

inline std::vector<std::size_t> draw_samples(std::size_t n, std::size_t s, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return draw_samples(rng, n, s);
}

/// Chance that s distinct uniform samples hit at least one of `withheld`
/// unavailable cells out of n.
inline double detection_probability(std::int64_t n, std::int64_t withheld, std::int64_t s)
{
    if (n < 0 || withheld < 0 || s < 0) throw DomainError("detection probability needs non-negative inputs");
    if (withheld > n) throw DomainError("cannot withhold more cells than exist");
    if (s > n) throw DomainError("cannot take more distinct samples than cells");
    if (s > n - withheld) return 1.0;
    long double miss = 1.0L;
    for (std::int64_t i = 0; i < s; ++i) {
        miss *= static_cast<long double>(n - withheld - i) / static_cast<long double>(n - i);
    }
    return static_cast<double>(1.0L - miss);
}

/// Unrecoverability threshold minus one for a 2k x 2k square: an adversary
/// must hide (k+1)^2 cells, so at most (k+1)^2 - 1 may stay unseen.
inline std::int64_t square_lambda(std::int64_t k) { return (k + 1) * (k + 1) - 1; }

struct Coverage {
    double value = 0.0;
    /// Bound on |value - exact|. Zero for exact rational evaluation apart
    /// from the final rounding to double.
    double error_bound = 0.0;
    bool exact = false;
};

namespace detail {

using boost::multiprecision::mpfr_float;
using boost::multiprecision::mpq_rational;
using boost::multiprecision::mpz_int;

inline mpz_int binom(std::int64_t n, std::int64_t r)
{
    if (r < 0 || n < 0 || r > n) return 0;
    mpz_int out = 1;
    r = std::min(r, n - r);
    for (std::int64_t i = 1; i <= r; ++i) {
        out *= n - r + i;
        out /= i;
    }
    return out;
}

template <class T>
T ipow(T base, unsigned e)
{
    T out = 1;
    while (e) {
        if (e & 1) out *= base;
        base *= base;
        e >>= 1;
    }
    return out;
}

// Restores the global MPFR default precision on scope exit.
class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned digits10) : saved_(mpfr_float::default_precision())
    {
        mpfr_float::default_precision(digits10);
    }
    ~PrecisionGuard() { mpfr_float::default_precision(saved_); }
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned saved_;
};

} // namespace detail

/// Probability that c independent drawings of s distinct elements out of n
/// together cover at least n - lambda distinct elements:
///   1 + sum_{i>=1} (-1)^i C(lambda+i-1, lambda) C(n, lambda+i) W_i^c,
///   W_i = C(n-lambda-i, s) / C(n, s).
/// Terms vanish once n - lambda - i < s.
inline Coverage euler_coverage(std::int64_t n, std::int64_t lambda, std::int64_t s, double c)
{
    using namespace detail;
    if (n < 1 || lambda < 0 || lambda >= n || s < 0 || s > n || !(c >= 0.0) || !std::isfinite(c)) {
        throw DomainError("euler coverage needs n >= 1, 0 <= lambda < n, 0 <= s <= n, c >= 0");
    }
    if (c == 0.0) return Coverage{0.0, 0.0, true};
    std::int64_t last = n - lambda - s;

    // Integer factors of term i, advanced by exact recurrences:
    //   a = C(lambda+i-1, lambda) * C(n, lambda+i),  b = C(n-lambda-i, s).
    std::vector<mpz_int> a;
    std::vector<mpz_int> b;
    if (last >= 1) {
        mpz_int left = 1;
        mpz_int right = binom(n, lambda + 1);
        mpz_int cov = binom(n - lambda - 1, s);
        for (std::int64_t i = 1; i <= last; ++i) {
            a.push_back(left * right);
            b.push_back(cov);
            left = left * (lambda + i) / i;
            right = right * (n - lambda - i) / (lambda + i + 1);
            if (n - lambda - i > 0) cov = cov * (n - lambda - i - s) / (n - lambda - i);
        }
    }
    mpz_int denom = binom(n, s);

    bool integral = std::floor(c) == c && c <= 4096;
    if (integral && n <= 64) {
        unsigned ci = static_cast<unsigned>(c);
        mpq_rational sum = 1;
        for (std::size_t j = 0; j < a.size(); ++j) {
            mpq_rational term = mpq_rational(a[j]) * ipow(mpq_rational(b[j], denom), ci);
            if (j % 2 == 0) sum -= term;
            else sum += term;
        }
        return Coverage{sum.convert_to<double>(), 0.0, true};
    }

    // Precision covers the largest integer factor plus a wide margin for
    // cancellation in the alternating sum.
    std::size_t max_bits = 1;
    for (const auto& x : a) max_bits = std::max<std::size_t>(max_bits, msb(x) + 1);
    unsigned bits = static_cast<unsigned>(max_bits) + 160;
    PrecisionGuard guard(static_cast<unsigned>(bits * 0.30103) + 1);
    mpfr_float sum = 1;
    mpfr_float abs_sum = 1;
    mpfr_float cc = c;
    mpfr_float d(denom);
    for (std::size_t j = 0; j < a.size(); ++j) {
        mpfr_float w = mpfr_float(b[j]) / d;
        mpfr_float wc = integral ? ipow(w, static_cast<unsigned>(c)) : mpfr_float(pow(w, cc));
        mpfr_float term = mpfr_float(a[j]) * wc;
        abs_sum += term;
        if (j % 2 == 0) sum -= term;
        else sum += term;
    }
    // Each term carries a few ulps of relative error at `bits` precision.
    double bound = abs_sum.convert_to<double>() * std::ldexp(1.0, -static_cast<int>(bits) + 8);
    return Coverage{sum.convert_to<double>(), bound + std::ldexp(1.0, -53), false};
}

struct SamplingParams {
    std::int64_t n = 0;
    std::int64_t lambda = 0;
    double h = 1.0;
    double m = 1.0;
    double p = 0.99;
};

/// Smallest s with euler_coverage(n, lambda, s, h/m) >= p. Uses only this
/// node's own stake m.
inline std::int64_t required_samples_for_stake(const SamplingParams& params)
{
    if (!(params.m > 0.0) || params.m > params.h || params.h > 1.0) {
        throw DomainError("stake fractions need 0 < m <= h <= 1");
    }
    if (!(params.p < 1.0)) throw DomainError("target probability must be below 1");
    double c = params.h / params.m;
    auto ok = [&](std::int64_t s) { return euler_coverage(params.n, params.lambda, s, c).value >= params.p; };
    if (!ok(params.n)) throw Infeasible("no sample count reaches the target coverage");
    std::int64_t lo = 0;
    std::int64_t hi = params.n;
    while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (ok(mid)) hi = mid;
        else lo = mid + 1;
    }
    return lo;
}

/// Miss probability a node of stake m must reach so that all nodes jointly
/// (stakes summing to h) miss with probability w: w^(m/h).
inline double stake_miss_probability(double w, double m, double h) { return std::pow(w, m / h); }

/// Fraction of trials in which s distinct samples hit one of the first
/// `withheld` positions.
inline double monte_carlo_detection(std::size_t n, std::size_t withheld, std::size_t s, std::size_t trials,
    std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        auto picks = draw_samples(rng, n, s);
        if (std::any_of(picks.begin(), picks.end(), [&](std::size_t x) { return x < withheld; })) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

/// Fraction of trials in which c drawings of s distinct elements cover at
/// least n - lambda distinct elements.
inline double monte_carlo_coverage(std::size_t n, std::size_t lambda, std::size_t s, std::size_t c,
    std::size_t trials, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::size_t good = 0;
    std::vector<char> seen(n);
    for (std::size_t t = 0; t < trials; ++t) {
        std::fill(seen.begin(), seen.end(), 0);
        std::size_t distinct = 0;
        for (std::size_t d = 0; d < c; ++d) {
            for (auto x : draw_samples(rng, n, s)) {
                if (!seen[x]) {
                    seen[x] = 1;
                    ++distinct;
                }
            }
        }
        if (distinct + lambda >= n) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(trials);
}

} // namespace daledger::sampler
