#pragma once

// Scoring: empirical returns, squared return error, learning curves, cross-run
// aggregation and trial-aligned prediction profiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccbench/learn.hpp"

namespace ccbench {

/// Number of trailing steps whose return is unreliable because the stream
/// ends: ceil(ln(eps) / ln(gamma)), at least 1.
inline std::size_t tail_length(double gamma, double tail_epsilon)
{
    if (gamma <= 0.0) return 1;
    const double h = std::ceil(std::log(tail_epsilon) / std::log(gamma));
    return std::max<std::size_t>(1, static_cast<std::size_t>(h));
}

struct return_series {
    std::vector<double> g;
    double gamma = 0.0;
    double tail_epsilon = 1e-6;
    /// Steps [0, scored) are scored; the rest is the excluded tail.
    std::size_t scored = 0;
};

/// G_t = US_{t+1} + gamma G_{t+1}, with G = 0 at the last logged step.
inline return_series compute_returns(std::span<const std::uint8_t> us, double gamma,
                                     double tail_epsilon = 1e-6)
{
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("compute_returns: gamma in [0,1)");
    return_series r;
    r.gamma = gamma;
    r.tail_epsilon = tail_epsilon;
    r.g.assign(us.size(), 0.0);
    for (std::size_t t = us.size(); t-- > 1;) r.g[t - 1] = us[t] + gamma * r.g[t];
    const std::size_t h = tail_length(gamma, tail_epsilon);
    r.scored = us.size() > h ? us.size() - h : 0;
    return r;
}

/// Running sum of squared return errors; chunked and whole-log use give
/// identical results because both add in step order.
class sre_accumulator {
public:
    void add(double prediction, double ret)
    {
        const double e = prediction - ret;
        sum_ += e * e;
        ++count_;
    }
    void add(std::span<const double> predictions, std::span<const double> returns)
    {
        for (std::size_t i = 0; i < predictions.size(); ++i) add(predictions[i], returns[i]);
    }
    std::size_t count() const noexcept { return count_; }
    double mean() const noexcept { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }

private:
    double sum_ = 0.0;
    std::size_t count_ = 0;
};

inline double msre(std::span<const double> predictions, const return_series& returns)
{
    if (predictions.size() != returns.g.size())
        throw std::invalid_argument("msre: predictions and returns differ in length");
    sre_accumulator acc;
    acc.add(predictions.first(returns.scored), std::span<const double>(returns.g).first(returns.scored));
    return acc.mean();
}

struct curve_point {
    std::int64_t bin_start = 0;
    double bin_msre = 0.0;
};

inline std::vector<curve_point> learning_curve(std::span<const double> predictions,
                                               const return_series& returns, std::int64_t bin)
{
    if (bin < 1) throw std::invalid_argument("learning_curve: bin must be >= 1");
    std::vector<curve_point> out;
    const auto n = static_cast<std::int64_t>(returns.scored);
    for (std::int64_t start = 0; start < n; start += bin) {
        const std::int64_t end = std::min(n, start + bin);
        sre_accumulator acc;
        for (std::int64_t t = start; t < end; ++t)
            acc.add(predictions[static_cast<std::size_t>(t)], returns.g[static_cast<std::size_t>(t)]);
        out.push_back({start, acc.mean()});
    }
    return out;
}

struct run_result {
    double msre = 0.0;
    std::vector<curve_point> curve;
    std::uint64_t seed = 0;
    std::string config_digest;
};

struct aggregate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Mean and standard error (sample standard deviation / sqrt(n)).
inline aggregate aggregate_values(std::span<const double> values)
{
    if (values.size() < 2) throw std::invalid_argument("aggregate_runs: need at least 2 runs");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n), values.size()};
}

inline aggregate aggregate_runs(std::span<const run_result> results)
{
    std::vector<double> v;
    v.reserve(results.size());
    for (const auto& r : results) v.push_back(r.msre);
    return aggregate_values(v);
}

// ---------------------------------------------------------------------------
// Trial-aligned profiles

struct profile_row {
    std::size_t trial = 0;
    std::int64_t offset = 0; ///< steps relative to CS onset
    std::uint8_t us = 0;
    std::vector<std::uint8_t> cs;
    std::vector<std::uint8_t> distractors;
    double prediction = 0.0;
    double ret = 0.0;
};

/// Rows aligned on CS onset for the last `max_trials` trials whose window
/// [onset - before, onset + after] lies inside the scored part of the log.
/// Channel columns are filled only when the log recorded channels.
inline std::vector<profile_row> trial_profile(const prediction_log& log, const return_series& returns,
                                              std::int64_t before, std::int64_t after,
                                              std::size_t max_trials)
{
    std::vector<std::size_t> chosen;
    const auto scored = static_cast<std::int64_t>(returns.scored);
    for (std::size_t k = log.trials.size(); k-- > 0 && chosen.size() < max_trials;) {
        const std::int64_t onset = log.trials[k].cs_onset;
        if (onset - before >= 0 && onset + after < scored) chosen.push_back(k);
    }
    std::reverse(chosen.begin(), chosen.end());

    const bool has_channels = log.channels.size() == log.size() * log.n_channels && log.n_channels > 0;
    std::vector<profile_row> rows;
    for (std::size_t k : chosen) {
        const std::int64_t onset = log.trials[k].cs_onset;
        for (std::int64_t off = -before; off <= after; ++off) {
            const auto t = static_cast<std::size_t>(onset + off);
            profile_row r;
            r.trial = k;
            r.offset = off;
            r.us = log.us[t];
            r.prediction = log.predictions[t];
            r.ret = returns.g[t];
            if (has_channels) {
                const std::uint8_t* row = log.channels.data() + t * log.n_channels;
                r.cs.assign(row, row + log.n_cs);
                r.distractors.assign(row + log.n_cs + 1, row + log.n_channels);
            }
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

} // namespace ccbench
