#include <gtest/gtest.h>

#include <cmath>

#include "ccbench/repr.hpp"
#include "oracles.hpp"

namespace {

using namespace ccbench;
using oracles::gelfand_radius;

observation make_obs(std::vector<std::uint8_t> cs, std::uint8_t us, std::vector<std::uint8_t> d)
{
    observation o(cs.size(), d.size());
    for (std::size_t i = 0; i < cs.size(); ++i) o.channels[i] = cs[i];
    o.channels[cs.size()] = us;
    for (std::size_t j = 0; j < d.size(); ++j) o.channels[cs.size() + 1 + j] = d[j];
    return o;
}

TEST(Presence, Examples)
{
    EXPECT_EQ(presence_features(make_obs({1}, 0, {0, 0})).to_dense(), (std::vector<double>{1, 0, 0, 0, 1}));
    EXPECT_EQ(presence_features(make_obs({0}, 1, {1})).to_dense(), (std::vector<double>{0, 1, 1, 1}));
    const auto z = presence_features(make_obs({0}, 0, std::vector<std::uint8_t>(10, 0))).to_dense();
    ASSERT_EQ(z.size(), 13u);
    for (std::size_t i = 0; i + 1 < z.size(); ++i) EXPECT_EQ(z[i], 0.0);
    EXPECT_EQ(z.back(), 1.0);
}

TEST(StimTraces, UpdateExamples)
{
    stim_traces s(1, 0.9);
    const std::uint8_t on = 1, off = 0;
    s.update(std::span(&on, 1));
    EXPECT_EQ(s.values()[0], 1.0);
    s.update(std::span(&on, 1)); // still on, no new onset: decays
    EXPECT_DOUBLE_EQ(s.values()[0], 0.9);
    s.values()[0] = 0.3;
    s.update(std::span(&off, 1));
    s.update(std::span(&on, 1));
    EXPECT_EQ(s.values()[0], 1.0);

    stim_traces z(1, 0.5);
    for (int i = 0; i < 5; ++i) z.update(std::span(&off, 1));
    EXPECT_EQ(z.values()[0], 0.0);
}

TEST(StimTraces, ExactGeometricDecayBetweenOnsets)
{
    const double tau = 0.95;
    stim_traces s(1, tau);
    const std::uint8_t on = 1, off = 0;
    s.update(std::span(&on, 1));
    const double y0 = s.values()[0];
    double expect = y0;
    for (int k = 1; k <= 200; ++k) {
        s.update(std::span(k < 4 ? &on : &off, 1));
        expect *= tau;
        ASSERT_EQ(s.values()[0], expect);
    }
    EXPECT_THROW(stim_traces(1, 1.0), std::invalid_argument);
}

TEST(TileCoding, Examples)
{
    EXPECT_EQ(tile_index(0.5, 0, 1, 8), 4);
    EXPECT_EQ(tile_index(1.0, 0, 1, 8), 7);
    EXPECT_EQ(tile_index(0.0, 0, 1, 8), 0);
    EXPECT_EQ(tile_index(0.124, 0, 1, 8), 0);
    EXPECT_EQ(tile_index(0.125, 0, 1, 8), 1);
    // second of two tilings is shifted by 1/16
    EXPECT_EQ(tile_index(0.1, 1, 2, 8), 1);
    EXPECT_EQ(tile_index(0.05, 1, 2, 8), 0);

    const std::vector<double> y{0.005};
    feature_vector f;
    tile_coded_features(y, 1, 8, f);
    EXPECT_EQ(f.dim, 9u);
    ASSERT_EQ(f.indices.size(), 1u); // bias only
    EXPECT_EQ(f.indices[0], 8u);
}

TEST(TileCoding, ActiveCountAndDimension)
{
    const std::vector<double> y{0.0, 0.009, 0.01, 0.5, 1.0};
    feature_vector f;
    tile_coded_features(y, 2, 8, f);
    EXPECT_EQ(f.dim, 5u * 2u * 8u + 1u);
    std::vector<int> per_channel(5, 0);
    for (auto i : f.indices)
        if (i + 1 < f.dim) ++per_channel[i / 16];
    EXPECT_EQ(per_channel, (std::vector<int>{0, 0, 2, 2, 2}));
    const auto dense = f.to_dense();
    EXPECT_EQ(dense.back(), 1.0);
    tile_coded_representation r(5, 0.9, 4, 16);
    EXPECT_EQ(r.dim(), 5u * 4u * 16u + 1u);
}

TEST(Microstimulus, Examples)
{
    feature_vector f;
    microstimulus_features(std::vector<double>{1.0}, 1, 0.8, f);
    EXPECT_DOUBLE_EQ(f.values[0], 1.0);
    microstimulus_features(std::vector<double>{0.5}, 2, 0.8, f); // mu = 0.5, 1.0
    EXPECT_DOUBLE_EQ(f.values[0], 0.5);
    EXPECT_DOUBLE_EQ(f.values[1], 0.5 * std::exp(-0.25 / 1.28));
    microstimulus_features(std::vector<double>{0.0}, 8, 0.8, f);
    for (int j = 0; j < 8; ++j) EXPECT_EQ(f.values[static_cast<std::size_t>(j)], 0.0);
    EXPECT_EQ(f.values[8], 1.0);
    microstimulus_representation r(12, 0.9, 8, 0.8);
    EXPECT_EQ(r.dim(), 97u);
}

TEST(Microstimulus, BoundedAndContinuous)
{
    feature_vector a, b;
    double prev_max_jump = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double y = i / 1000.0;
        microstimulus_features(std::vector<double>{y}, 16, 0.8, a);
        microstimulus_features(std::vector<double>{y + 1e-7}, 16, 0.8, b);
        for (int j = 0; j < 16; ++j) {
            const auto k = static_cast<std::size_t>(j);
            EXPECT_GE(a.values[k], 0.0);
            EXPECT_LE(a.values[k], 1.0);
            prev_max_jump = std::max(prev_max_jump, std::abs(a.values[k] - b.values[k]));
        }
    }
    EXPECT_LT(prev_max_jump, 1e-6);
}

TEST(Esn, InputWeightsAreSignedScaling)
{
    esn net(12, {100, 0.9, 0.1, 0.1}, 3);
    for (Eigen::Index i = 0; i < net.input_weights().size(); ++i)
        EXPECT_EQ(std::abs(net.input_weights().data()[i]), 0.1);
    for (Eigen::Index i = 0; i < net.feedback_weights().size(); ++i)
        EXPECT_EQ(std::abs(net.feedback_weights()[i]), 0.1);
    const double frac_pos = (net.input_weights().array() > 0).cast<double>().mean();
    EXPECT_NEAR(frac_pos, 0.5, 0.05);
}

TEST(Esn, SpectralRadiusMatchesGelfandOracle)
{
    for (double rho : {0.9, 0.99}) {
        esn net(12, {100, rho, 0.1, 0.1}, 21);
        const Eigen::MatrixXd w(net.recurrent_weights());
        const double measured = gelfand_radius(w, 40);
        EXPECT_NEAR(measured, rho, 1e-3);
        EXPECT_NEAR(spectral_radius(w), rho, 1e-9);
    }
}

TEST(Esn, DensityWithinThreeStandardErrors)
{
    const double density = 0.05;
    esn net(12, {1000, 0.99, 0.1, density}, 5);
    const double n = 1000.0 * 1000.0;
    const double frac = net.recurrent_weights().nonZeros() / n;
    EXPECT_LE(std::abs(frac - density), 3.0 * std::sqrt(density * (1 - density) / n));
}

TEST(Esn, ZeroInputKeepsZeroState)
{
    esn net(4, {50, 0.9, 0.5, 0.2}, 1);
    const std::vector<std::uint8_t> zero(4, 0);
    feature_vector f;
    for (int t = 0; t < 10; ++t) net.step(zero, 0.0, f);
    EXPECT_TRUE(net.hidden().isZero(0.0));
    EXPECT_EQ(f.values.size(), 51u);
    EXPECT_EQ(f.values.back(), 1.0);
}

TEST(Esn, ActivationsStayInOpenInterval)
{
    esn net(4, {50, 0.99, 0.5, 0.2}, 2);
    const std::vector<std::uint8_t> ones(4, 1);
    feature_vector f;
    for (int t = 0; t < 100; ++t) {
        net.step(ones, 5.0, f);
        EXPECT_LT(net.hidden().cwiseAbs().maxCoeff(), 1.0);
    }
}

TEST(Esn, ZeroInputContracts)
{
    esn net(4, {100, 0.9, 0.5, 0.2}, 8);
    const std::vector<std::uint8_t> ones(4, 1), zero(4, 0);
    feature_vector f;
    for (int t = 0; t < 20; ++t) net.step(ones, 0.0, f);
    double prev = net.hidden().norm();
    ASSERT_GT(prev, 0.0);
    for (int t = 0; t < 100; ++t) {
        net.step(zero, 0.0, f);
        // tanh shrinks and the recurrent matrix has radius < 1: the norm
        // decays geometrically once the transient has passed
        if (t >= 20) EXPECT_LT(net.hidden().norm(), prev);
        prev = net.hidden().norm();
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Esn, WeightsImmutable)
{
    esn net(12, {100, 0.99, 0.1, 0.1}, 4);
    const Eigen::MatrixXd w_in = net.input_weights();
    const Eigen::MatrixXd w_h(net.recurrent_weights());
    const Eigen::VectorXd w_fb = net.feedback_weights();
    rng_engine rng(1);
    std::vector<std::uint8_t> o(12);
    feature_vector f;
    for (int t = 0; t < 1'000'000; ++t) {
        for (auto& c : o) c = bernoulli(rng, 0.1);
        net.step(o, f.values.empty() ? 0.0 : f.values[0], f);
    }
    EXPECT_EQ(w_in, net.input_weights());
    EXPECT_EQ(w_h, Eigen::MatrixXd(net.recurrent_weights()));
    EXPECT_EQ(w_fb, net.feedback_weights());
}

TEST(Esn, EqualSeedsEqualReservoirs)
{
    esn a(3, {30, 0.9, 0.1, 0.3}, 77), b(3, {30, 0.9, 0.1, 0.3}, 77);
    EXPECT_EQ(Eigen::MatrixXd(a.recurrent_weights()), Eigen::MatrixXd(b.recurrent_weights()));
    EXPECT_EQ(a.input_weights(), b.input_weights());
}

TEST(Esn, TinyReservoirResamplesUntilUsable)
{
    // A 1x1 reservoir with low density is often all-zero; construction must still succeed.
    for (std::uint64_t s = 0; s < 20; ++s) {
        esn net(2, {1, 0.5, 0.1, 0.2}, s);
        EXPECT_NEAR(std::abs(Eigen::MatrixXd(net.recurrent_weights())(0, 0)), 0.5, 1e-15);
    }
}

TEST(Dimensions, PerRepresentation)
{
    EXPECT_EQ(presence_representation(12).dim(), 13u);
    EXPECT_EQ(tile_coded_representation(12, 0.9, 2, 8).dim(), 12u * 16u + 1u);
    EXPECT_EQ(microstimulus_representation(12, 0.9, 8, 0.8).dim(), 12u * 8u + 1u);
    EXPECT_EQ(esn_representation(12, {100, 0.99, 0.1, 0.1}, 1).dim(), 101u);
}

} // namespace
