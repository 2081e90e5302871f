#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>

#include "ccbench/eval.hpp"
#include "oracles.hpp"

namespace {

using namespace ccbench;
using oracles::forward_returns;

TEST(Returns, HandExample)
{
    std::vector<std::uint8_t> us{0, 0, 1, 1, 0, 0, 0, 0};
    const auto r = compute_returns(us, 0.75);
    EXPECT_DOUBLE_EQ(r.g[0], 1.3125);
    EXPECT_DOUBLE_EQ(r.g[1], 1.75);
    EXPECT_DOUBLE_EQ(r.g[2], 1.0);
    EXPECT_DOUBLE_EQ(r.g[3], 0.0);
    EXPECT_EQ(r.g.back(), 0.0);
}

TEST(Returns, AllZero)
{
    const auto r = compute_returns(std::vector<std::uint8_t>(50, 0), 0.9);
    for (double g : r.g) EXPECT_EQ(g, 0.0);
}

TEST(Returns, MatchesForwardSums)
{
    rng_engine rng(1);
    for (double gamma : {0.75, 0.9, 0.95}) {
        for (int s = 0; s < 50; ++s) {
            std::vector<std::uint8_t> us(200);
            for (auto& u : us) u = bernoulli(rng, 0.2);
            const auto r = compute_returns(us, gamma);
            const auto f = forward_returns(us, gamma);
            for (std::size_t t = 0; t < us.size(); ++t) ASSERT_NEAR(r.g[t], f[t], 1e-9);
            for (double g : r.g) {
                EXPECT_GE(g, 0.0);
                EXPECT_LE(g, 1.0 / (1.0 - gamma) + 1e-12);
            }
        }
    }
}

TEST(Returns, RejectsBadGamma)
{
    const std::vector<std::uint8_t> us(5, 0);
    EXPECT_THROW(compute_returns(us, 1.0), std::invalid_argument);
    EXPECT_THROW(compute_returns(us, -0.1), std::invalid_argument);
}

TEST(Tail, LengthAndBoundary)
{
    EXPECT_EQ(tail_length(0.9, 1e-6), 132u); // ln(1e-6)/ln(0.9) = 131.1
    EXPECT_EQ(tail_length(0.75, 1e-6), 49u);
    EXPECT_EQ(tail_length(0.0, 1e-6), 1u);
    EXPECT_EQ(tail_length(0.01, 0.5), 1u);
    const auto r = compute_returns(std::vector<std::uint8_t>(1000, 0), 0.9);
    EXPECT_EQ(r.scored, 1000u - 132u);
    const auto small = compute_returns(std::vector<std::uint8_t>(100, 0), 0.9);
    EXPECT_EQ(small.scored, 0u);
}

TEST(Tail, ScoredReturnsCloseToInfiniteHorizon)
{
    // Extending the stream past the cut changes scored returns by at most eps/(1-gamma).
    const double gamma = 0.9, eps = 1e-6;
    rng_engine rng(4);
    std::vector<std::uint8_t> us(2000);
    for (auto& u : us) u = bernoulli(rng, 0.3);
    const auto cut = compute_returns(std::span(us).first(1000), gamma, eps);
    const auto full = compute_returns(us, gamma, eps);
    for (std::size_t t = 0; t < cut.scored; ++t) EXPECT_LE(std::abs(cut.g[t] - full.g[t]), eps / (1 - gamma));
}

TEST(Msre, Examples)
{
    rng_engine rng(2);
    std::vector<std::uint8_t> us(500);
    for (auto& u : us) u = bernoulli(rng, 0.1);
    const auto r = compute_returns(us, 0.8);
    EXPECT_EQ(msre(r.g, r), 0.0);

    std::vector<double> zero(us.size(), 0.0), shifted(r.g);
    for (double& v : shifted) v += 0.25;
    double sq = 0.0;
    for (std::size_t t = 0; t < r.scored; ++t) sq += r.g[t] * r.g[t];
    EXPECT_NEAR(msre(zero, r), sq / static_cast<double>(r.scored), 1e-12);
    EXPECT_NEAR(msre(shifted, r), 0.0625, 1e-12);
    EXPECT_THROW(msre(std::vector<double>(3), r), std::invalid_argument);
}

TEST(Msre, ChunkingInvariant)
{
    rng_engine rng(5);
    std::vector<std::uint8_t> us(10'000);
    std::vector<double> v(us.size());
    for (std::size_t t = 0; t < us.size(); ++t) {
        us[t] = bernoulli(rng, 0.05);
        v[t] = uniform01(rng);
    }
    const auto r = compute_returns(us, 0.9);
    sre_accumulator acc;
    for (std::size_t start = 0; start < r.scored; start += 997) {
        const std::size_t n = std::min<std::size_t>(997, r.scored - start);
        acc.add(std::span(v).subspan(start, n), std::span<const double>(r.g).subspan(start, n));
    }
    EXPECT_EQ(acc.mean(), msre(v, r));
}

TEST(Curve, BinsCoverScoredRange)
{
    std::vector<std::uint8_t> us(25'000, 0);
    std::vector<double> v(us.size(), 0.5);
    const auto r = compute_returns(us, 0.9);
    const auto c = learning_curve(v, r, 10'000);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0].bin_start, 0);
    EXPECT_EQ(c[2].bin_start, 20'000);
    for (const auto& p : c) EXPECT_DOUBLE_EQ(p.bin_msre, 0.25);
    EXPECT_THROW(learning_curve(v, r, 0), std::invalid_argument);
}

TEST(Aggregate, Examples)
{
    const std::vector<double> two{1.0, 3.0};
    const auto a = aggregate_values(two);
    EXPECT_DOUBLE_EQ(a.mean, 2.0);
    EXPECT_DOUBLE_EQ(a.se, 1.0);
    const std::vector<double> same(5, 0.4);
    EXPECT_EQ(aggregate_values(same).se, 0.0);
    EXPECT_THROW(aggregate_values(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Aggregate, MatchesTwoPassFormula)
{
    rng_engine rng(3);
    std::vector<run_result> runs(30);
    std::vector<double> x;
    for (auto& r : runs) {
        r.msre = uniform01(rng);
        x.push_back(r.msre);
    }
    // Welford's online variance as an independent computation
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (x[i] - mean);
    }
    const double se = std::sqrt(m2 / 29.0) / std::sqrt(30.0);
    const auto a = aggregate_runs(runs);
    EXPECT_NEAR(a.mean, mean, 1e-14);
    EXPECT_NEAR(a.se, se, 1e-14);
    EXPECT_EQ(a.n, 30u);
}

TEST(Profile, AlignedOnCsOnset)
{
    environment env(trace_conditioning_preset(isi_preset::short_isi), 6);
    presence_representation rep(env.n_channels());
    const auto log = run_linear_learner(env, rep, {}, 50'000, true);
    const auto r = compute_returns(log.us, log.gamma);
    const auto rows = trial_profile(log, r, 5, 30, 4);
    ASSERT_EQ(rows.size(), 4u * 36u);
    for (const auto& row : rows) {
        if (row.offset == 0) EXPECT_EQ(row.cs.at(0), 1);
        if (row.offset == -1) EXPECT_EQ(row.cs.at(0), 0);
        EXPECT_EQ(row.distractors.size(), 10u);
    }
    // the selected trials are the last four that fit in the scored range
    const auto last = rows.back().trial;
    EXPECT_EQ(rows.front().trial, last - 3);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& tr = log.trials[last - 3 + k];
        const auto us_off = tr.us_onset - tr.cs_onset;
        const auto& row = rows[k * 36 + static_cast<std::size_t>(5 + us_off - 1)];
        EXPECT_EQ(row.offset, us_off - 1);
        // later trials add at most (1+g) g^87 / (1 - g^87): the next US is at least
        // ITI 80 + ISI 7 steps away
        const double g = log.gamma, later = (1 + g) * std::pow(g, 87) / (1 - std::pow(g, 87));
        EXPECT_GE(row.ret, 1.0 + g - 1e-12);
        EXPECT_LE(row.ret, 1.0 + g + later);
        EXPECT_GT(row.ret, rows[k * 36 + static_cast<std::size_t>(5 + us_off - 2)].ret);
        EXPECT_GT(row.ret, rows[k * 36 + static_cast<std::size_t>(5 + us_off)].ret);
    }
}

} // namespace
