#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <random>

#include "daledger/sampler.hpp"
#include "sampler_oracles.hpp"

using namespace daledger;
using namespace daledger::sampler;

TEST(DrawSamples, TakesEverythingWhenSEqualsN)
{
    auto picks = draw_samples(4, 4, 7);
    std::sort(picks.begin(), picks.end());
    EXPECT_EQ(picks, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(DrawSamples, DeterministicForSeed)
{
    EXPECT_EQ(draw_samples(4096, 15, 99), draw_samples(4096, 15, 99));
    EXPECT_NE(draw_samples(4096, 15, 99), draw_samples(4096, 15, 100));
}

TEST(DrawSamples, DistinctWithinADrawing)
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 2000; ++t) {
        std::size_t n = 1 + rng() % 40;
        std::size_t s = rng() % (n + 1);
        auto p = draw_samples(rng, n, s);
        ASSERT_EQ(p.size(), s);
        std::sort(p.begin(), p.end());
        ASSERT_EQ(std::adjacent_find(p.begin(), p.end()), p.end());
        for (auto x : p) ASSERT_LT(x, n);
    }
    EXPECT_THROW(draw_samples(3, 4, 1), DomainError);
}

TEST(DrawSamples, ChiSquaredUniformity)
{
    std::mt19937_64 rng(2024);
    std::vector<double> counts(64, 0);
    const std::size_t draws = 100000;
    for (std::size_t i = 0; i < draws; ++i) counts[draw_samples(rng, 64, 1)[0]] += 1;
    double expected = draws / 64.0;
    double chi2 = 0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(63);
    double p = boost::math::cdf(boost::math::complement(dist, chi2));
    EXPECT_GT(p, 0.001) << "chi2=" << chi2;
}

TEST(DrawSamples, PairUniformityForLargerS)
{
    // Every position is equally likely to appear in a drawing of s.
    std::mt19937_64 rng(2025);
    std::vector<double> counts(16, 0);
    const std::size_t draws = 50000;
    for (std::size_t i = 0; i < draws; ++i)
        for (auto x : draw_samples(rng, 16, 5)) counts[x] += 1;
    double expected = draws * 5 / 16.0;
    double chi2 = 0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(15);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
}

TEST(DetectionProbability, Endpoints)
{
    EXPECT_EQ(detection_probability(100, 0, 10), 0.0);
    EXPECT_EQ(detection_probability(100, 100, 1), 1.0);
    EXPECT_EQ(detection_probability(100, 95, 6), 1.0);
    EXPECT_THROW(detection_probability(-1, 0, 0), DomainError);
    EXPECT_THROW(detection_probability(10, -1, 0), DomainError);
    EXPECT_THROW(detection_probability(10, 0, -2), DomainError);
}

TEST(DetectionProbability, FifteenSamplesOnA4096Square)
{
    std::int64_t k = 32;
    double p = detection_probability(4 * k * k, (k + 1) * (k + 1), 15);
    EXPECT_GE(p, 0.99);
    double mc = monte_carlo_detection(4096, 1089, 15, 200000, 5);
    EXPECT_NEAR(mc, p, 0.004);
    // Fourteen samples fall short.
    EXPECT_LT(detection_probability(4096, 1089, 14), 0.99);
}

TEST(DetectionProbability, MonotoneInWithheldAndSamples)
{
    for (int w = 0; w < 60; ++w)
        for (int s = 0; s < 20; ++s) {
            ASSERT_LE(detection_probability(64, w, s), detection_probability(64, w + 1, s));
            ASSERT_LE(detection_probability(64, w, s), detection_probability(64, w, s + 1));
        }
}

TEST(EulerCoverage, SingleDrawingOfEverything)
{
    auto c = euler_coverage(12, 0, 12, 1);
    EXPECT_TRUE(c.exact);
    EXPECT_DOUBLE_EQ(c.value, 1.0);
}

TEST(EulerCoverage, ZeroDrawingsCoverNothing)
{
    EXPECT_EQ(euler_coverage(10, 3, 4, 0).value, 0.0);
    EXPECT_NEAR(euler_coverage(10, 3, 0, 5).value, 0.0, 1e-15);
}

TEST(EulerCoverage, MatchesMarkovChainOracle)
{
    for (int n : {1, 2, 3, 5, 8, 13, 20})
        for (int lambda = 0; lambda < n; lambda += 1 + n / 4)
            for (int s = 0; s <= n; s += 1 + n / 5)
                for (int c : {1, 2, 3, 7}) {
                    double exact = daledger::testing::coverage_by_markov_chain(n, lambda, s, c);
                    ASSERT_NEAR(euler_coverage(n, lambda, s, c).value, exact, 1e-12)
                        << n << " " << lambda << " " << s << " " << c;
                }
}

TEST(EulerCoverage, HighPrecisionPathAgreesWithExact)
{
    // n above the exact cutoff, checked against the Markov chain oracle.
    for (auto [n, lambda, s, c] : {std::tuple{80, 20, 6, 4}, std::tuple{100, 30, 10, 2}, std::tuple{128, 80, 3, 5}}) {
        auto cov = euler_coverage(n, lambda, s, c);
        EXPECT_FALSE(cov.exact);
        EXPECT_LT(cov.error_bound, 1e-12);
        EXPECT_NEAR(cov.value, daledger::testing::coverage_by_markov_chain(n, lambda, s, c), 1e-12);
    }
}

TEST(EulerCoverage, MonteCarloAgreement)
{
    double exact = euler_coverage(16, 3, 4, 5).value;
    double mc = monte_carlo_coverage(16, 3, 4, 5, 1000000, 77);
    EXPECT_NEAR(mc, exact, 0.005);
}

TEST(EulerCoverage, DomainErrors)
{
    EXPECT_THROW(euler_coverage(0, 0, 0, 1), DomainError);
    EXPECT_THROW(euler_coverage(10, 10, 1, 1), DomainError);
    EXPECT_THROW(euler_coverage(10, 2, 11, 1), DomainError);
    EXPECT_THROW(euler_coverage(10, 2, 3, -1), DomainError);
}

TEST(EulerCoverage, MonotoneOnGrid)
{
    for (int n : {6, 12, 24})
        for (int lambda = 0; lambda + 1 < n; ++lambda)
            for (int s = 0; s < n; ++s)
                for (int c = 1; c < 5; ++c) {
                    double v = euler_coverage(n, lambda, s, c).value;
                    ASSERT_LE(v, euler_coverage(n, lambda, s + 1, c).value + 1e-12);
                    ASSERT_LE(v, euler_coverage(n, lambda, s, c + 1).value + 1e-12);
                    ASSERT_LE(v, euler_coverage(n, lambda + 1, s, c).value + 1e-12);
                }
}

TEST(EulerCoverage, FractionalDrawingsInterpolate)
{
    double lo = euler_coverage(40, 20, 12, 2).value;
    double mid = euler_coverage(40, 20, 12, 2.5).value;
    double hi = euler_coverage(40, 20, 12, 3).value;
    EXPECT_LT(lo, mid);
    EXPECT_LT(mid, hi);
}

TEST(RequiredSamples, FullStakeIsSingleDrawing)
{
    SamplingParams p{64, 15, 0.5, 0.5, 0.9};
    auto s = required_samples_for_stake(p);
    EXPECT_GE(euler_coverage(64, 15, s, 1).value, 0.9);
    EXPECT_LT(euler_coverage(64, 15, s - 1, 1).value, 0.9);
}

TEST(RequiredSamples, MinimalAcrossStakes)
{
    for (double m : {0.5, 0.25, 0.125}) {
        SamplingParams p{64, 15, 0.5, m, 0.9};
        auto s = required_samples_for_stake(p);
        double c = 0.5 / m;
        EXPECT_GE(euler_coverage(64, 15, s, c).value, 0.9) << m;
        ASSERT_GT(s, 0);
        EXPECT_LT(euler_coverage(64, 15, s - 1, c).value, 0.9) << m;
    }
}

TEST(RequiredSamples, HalvingStakeAtMostDoublesTotalSamples)
{
    for (int n : {16, 32, 64})
        for (int lambda : {1, n / 4, n / 2})
            for (double p : {0.5, 0.9, 0.99})
                for (double m : {0.5, 0.25}) {
                    auto s1 = required_samples_for_stake({n, lambda, 0.5, m, p});
                    auto s2 = required_samples_for_stake({n, lambda, 0.5, m / 2, p});
                    EXPECT_LE(s2, s1) << n << " " << lambda << " " << p << " " << m;
                    EXPECT_LE(s2, 2 * s1 + 1);
                }
}

TEST(RequiredSamples, DomainErrors)
{
    EXPECT_THROW(required_samples_for_stake({64, 15, 0.5, 0.6, 0.9}), DomainError);
    EXPECT_THROW(required_samples_for_stake({64, 15, 0.5, 0.0, 0.9}), DomainError);
    EXPECT_THROW(required_samples_for_stake({64, 15, 0.5, 0.5, 1.0}), DomainError);
}

TEST(ProductIdentity, RandomStakeSplits)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        double h = 0.2 + 0.8 * u(rng);
        std::size_t d = 1 + rng() % 6;
        std::vector<double> cuts{0.0, 1.0};
        for (std::size_t j = 1; j < d; ++j) cuts.push_back(u(rng));
        std::sort(cuts.begin(), cuts.end());
        double w = 0.001 + 0.998 * u(rng);
        double product = 1.0;
        for (std::size_t j = 0; j < d; ++j) product *= stake_miss_probability(w, h * (cuts[j + 1] - cuts[j]), h);
        EXPECT_NEAR(product, w, 1e-12);
    }
}

TEST(SquareLambda, UnrecoverabilityGeometry)
{
    EXPECT_EQ(square_lambda(32), 1088);
    EXPECT_EQ(square_lambda(1), 3);
}
