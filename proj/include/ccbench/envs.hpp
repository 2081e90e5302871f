#pragma once

// Stimulus-stream generators for trace conditioning, noisy patterning and
// trace patterning.
//
// All three problems share one trial scheduler: a trial starts at a CS onset,
// the US (if the trial is reinforced) starts ISI steps later, and the next CS
// onset follows the US onset by ITI steps. The stream opens with one sampled
// ITI of background before the first trial.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "ccbench/rng.hpp"

namespace ccbench {

/// One step of binary stimuli. Channel layout is [cs..., us, distractors...].
struct observation {
    std::int64_t t = 0;
    std::size_t n_cs = 0;
    std::size_t n_distractors = 0;
    std::vector<std::uint8_t> channels;

    observation() = default;
    observation(std::size_t cs_count, std::size_t distractor_count)
        : n_cs(cs_count), n_distractors(distractor_count),
          channels(cs_count + 1 + distractor_count, 0)
    {
    }

    std::size_t size() const noexcept { return channels.size(); }
    std::uint8_t us() const { return channels[n_cs]; }
    std::uint8_t cs(std::size_t i) const { return channels[i]; }
    std::uint8_t distractor(std::size_t j) const { return channels[n_cs + 1 + j]; }

    std::span<const std::uint8_t> cs_channels() const { return {channels.data(), n_cs}; }
    std::span<const std::uint8_t> distractor_channels() const
    {
        return {channels.data() + n_cs + 1, n_distractors};
    }

    bool operator==(const observation&) const = default;
};

struct trace_conditioning_config {
    int isi_low = 7;
    int isi_high = 13;
    int iti_low = 80;
    int iti_high = 120;
    int cs_duration = 4;
    int us_duration = 2;
    /// Mean steps between onsets, one entry per distractor channel.
    std::vector<double> distractor_means = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    int distractor_duration = 4;

    bool operator==(const trace_conditioning_config&) const = default;
};

struct noisy_patterning_config {
    int n_cs = 8;
    int n_patterns = 8;
    int n_distractors = 10;
    /// Fraction of trials whose outcome is flipped.
    double noise = 0.10;
    int isi = 4;
    int cs_duration = 4;
    int us_duration = 2;
    int iti_low = 80;
    int iti_high = 120;

    bool operator==(const noisy_patterning_config&) const = default;
};

struct trace_patterning_config {
    int n_cs = 8;
    int n_patterns = 8;
    int n_distractors = 10;
    double noise = 0.10;
    int isi_low = 7;
    int isi_high = 13;
    int cs_duration = 4;
    int us_duration = 2;
    int iti_low = 80;
    int iti_high = 120;

    bool operator==(const trace_patterning_config&) const = default;
};

using env_config =
    std::variant<trace_conditioning_config, noisy_patterning_config, trace_patterning_config>;

// ---------------------------------------------------------------------------
// Presets

enum class isi_preset { short_isi, medium_isi, long_isi };

inline std::pair<int, int> isi_bounds(isi_preset p)
{
    switch (p) {
    case isi_preset::short_isi: return {7, 13};
    case isi_preset::medium_isi: return {14, 26};
    case isi_preset::long_isi: return {20, 40};
    }
    throw std::invalid_argument("unknown ISI preset");
}

enum class difficulty { easy, medium, hard };

/// Noisy-patterning difficulty presets. Only `medium` comes from the published
/// setup; `easy` and `hard` are suite defaults.
inline noisy_patterning_config noisy_patterning_preset(difficulty d)
{
    noisy_patterning_config c;
    switch (d) {
    case difficulty::easy:
        c.n_patterns = 4;
        c.n_distractors = 5;
        c.noise = 0.05;
        break;
    case difficulty::medium: break;
    case difficulty::hard:
        c.n_patterns = 16;
        c.n_distractors = 20;
        c.noise = 0.15;
        break;
    }
    return c;
}

inline trace_conditioning_config trace_conditioning_preset(isi_preset p)
{
    trace_conditioning_config c;
    std::tie(c.isi_low, c.isi_high) = isi_bounds(p);
    return c;
}

inline trace_patterning_config trace_patterning_preset(isi_preset p)
{
    trace_patterning_config c;
    std::tie(c.isi_low, c.isi_high) = isi_bounds(p);
    return c;
}

// ---------------------------------------------------------------------------
// Validation and derived quantities

/// C(n, k) for n <= 62.
inline std::uint64_t binomial(int n, int k)
{
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 0; i < k; ++i) r = r * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
    return static_cast<std::uint64_t>(r);
}

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw std::invalid_argument("invalid environment config: " + what);
}

inline void check_schedule(int isi_low, int isi_high, int iti_low, int iti_high, int cs_duration,
                           int us_duration)
{
    require(isi_low >= 1, "isi_low >= 1");
    require(isi_high >= isi_low, "isi_high >= isi_low");
    require(iti_low > isi_high, "iti_low > isi_high");
    require(iti_high >= iti_low, "iti_high >= iti_low");
    require(cs_duration >= 1, "cs_duration >= 1");
    require(us_duration >= 1, "us_duration >= 1");
    require(iti_low >= us_duration, "iti_low >= us_duration");
}

inline void check_patterns(int n_cs, int n_patterns, int n_distractors, double noise)
{
    require(n_cs >= 2 && n_cs % 2 == 0, "n_cs even and >= 2");
    require(n_cs <= 62, "n_cs <= 62");
    require(n_patterns >= 1, "n_patterns >= 1");
    require(static_cast<std::uint64_t>(n_patterns) + 1 <= binomial(n_cs, n_cs / 2),
            "n_patterns <= C(n_cs, n_cs/2) - 1");
    require(n_distractors >= 0, "n_distractors >= 0");
    require(noise >= 0.0 && noise <= 1.0, "noise in [0, 1]");
}

} // namespace detail

inline void validate(const trace_conditioning_config& c)
{
    detail::check_schedule(c.isi_low, c.isi_high, c.iti_low, c.iti_high, c.cs_duration,
                           c.us_duration);
    for (double m : c.distractor_means) detail::require(m >= 1.0, "distractor mean >= 1");
    detail::require(c.distractor_duration >= 1, "distractor_duration >= 1");
}

inline void validate(const noisy_patterning_config& c)
{
    detail::check_schedule(c.isi, c.isi, c.iti_low, c.iti_high, c.cs_duration, c.us_duration);
    detail::check_patterns(c.n_cs, c.n_patterns, c.n_distractors, c.noise);
}

inline void validate(const trace_patterning_config& c)
{
    detail::check_schedule(c.isi_low, c.isi_high, c.iti_low, c.iti_high, c.cs_duration,
                           c.us_duration);
    detail::check_patterns(c.n_cs, c.n_patterns, c.n_distractors, c.noise);
}

inline void validate(const env_config& c)
{
    std::visit([](const auto& x) { validate(x); }, c);
}

inline double expected_isi(const trace_conditioning_config& c)
{
    return 0.5 * (c.isi_low + c.isi_high);
}
inline double expected_isi(const noisy_patterning_config& c) { return c.isi; }
inline double expected_isi(const trace_patterning_config& c)
{
    return 0.5 * (c.isi_low + c.isi_high);
}
inline double expected_isi(const env_config& c)
{
    return std::visit([](const auto& x) { return expected_isi(x); }, c);
}

/// gamma = 1 - 1/E[ISI], so the return's horizon matches the ISI.
inline double discount_for(const env_config& c)
{
    const double e = expected_isi(c);
    if (e < 2.0) throw std::invalid_argument("discount_for: expected ISI must be >= 2");
    return 1.0 - 1.0 / e;
}

inline std::size_t cs_count(const env_config& c)
{
    return std::visit(
        [](const auto& x) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, trace_conditioning_config>)
                return 1;
            else
                return static_cast<std::size_t>(x.n_cs);
        },
        c);
}

inline std::size_t distractor_count(const env_config& c)
{
    return std::visit(
        [](const auto& x) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, trace_conditioning_config>)
                return x.distractor_means.size();
            else
                return static_cast<std::size_t>(x.n_distractors);
        },
        c);
}

inline std::size_t channel_count(const env_config& c)
{
    return cs_count(c) + 1 + distractor_count(c);
}

// ---------------------------------------------------------------------------
// Patterns

/// A CS configuration as a bit mask; bit i is CS channel i.
using cs_pattern = std::uint64_t;

/// Uniform (n/2)-hot mask over n channels.
inline cs_pattern sample_half_hot(int n, rng_engine& rng)
{
    int idx[64];
    for (int i = 0; i < n; ++i) idx[i] = i;
    cs_pattern mask = 0;
    for (int i = 0; i < n / 2; ++i) {
        const int j = uniform_int(rng, i, n - 1);
        std::swap(idx[i], idx[j]);
        mask |= cs_pattern{1} << idx[i];
    }
    return mask;
}

/// k distinct (n/2)-hot patterns drawn uniformly without replacement, sorted.
inline std::vector<cs_pattern> sample_activation_patterns(int n, int k, rng_engine& rng)
{
    if (n < 2 || n % 2 != 0 || n > 62)
        throw std::invalid_argument("sample_activation_patterns: n must be even, 2..62");
    if (k < 1 || static_cast<std::uint64_t>(k) + 1 > binomial(n, n / 2))
        throw std::invalid_argument("sample_activation_patterns: k out of range");
    std::vector<cs_pattern> out;
    out.reserve(static_cast<std::size_t>(k));
    while (out.size() < static_cast<std::size_t>(k)) {
        const cs_pattern p = sample_half_hot(n, rng);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Environment

/// Bookkeeping for one trial, used for trial-aligned profiles and tests.
struct trial_record {
    std::int64_t cs_onset = 0;
    std::int64_t us_onset = 0;
    cs_pattern pattern = 0;
    bool activating = true; ///< pattern is in the activation set (always true for trace conditioning)
    bool flipped = false;   ///< outcome inverted by noise
    bool reinforced = true; ///< US delivered on this trial
};

class environment {
public:
    environment(env_config config, std::uint64_t seed)
        : config_(std::move(config)), rng_(make_engine(seed))
    {
        validate(config_);
        n_cs_ = cs_count(config_);
        n_distractors_ = distractor_count(config_);
        std::visit([this](const auto& c) { init(c); }, config_);
    }

    const env_config& config() const noexcept { return config_; }
    std::size_t n_cs() const noexcept { return n_cs_; }
    std::size_t n_distractors() const noexcept { return n_distractors_; }
    std::size_t n_channels() const noexcept { return n_cs_ + 1 + n_distractors_; }
    double discount() const { return discount_for(config_); }
    std::int64_t time() const noexcept { return t_; }

    const std::vector<cs_pattern>& activation_patterns() const noexcept { return activation_; }
    const std::vector<trial_record>& trials() const noexcept { return trials_; }

    /// True when the most recent step() began a trial (CS onset).
    bool last_step_was_trial_onset() const noexcept
    {
        return !trials_.empty() && trials_.back().cs_onset == t_ - 1;
    }

    observation step()
    {
        observation o(n_cs_, n_distractors_);
        step(o);
        return o;
    }

    /// Writes the next observation into `o`, reusing its storage.
    void step(observation& o)
    {
        if (o.n_cs != n_cs_ || o.n_distractors != n_distractors_ || o.channels.size() != n_channels())
            o = observation(n_cs_, n_distractors_);
        o.t = t_;
        if (t_ == next_cs_onset_) begin_trial();

        const bool in_cs = has_trial_ && t_ >= cur_.cs_onset && t_ < cur_.cs_onset + cs_duration_;
        const bool in_us = has_trial_ && cur_.reinforced && t_ >= cur_.us_onset &&
                           t_ < cur_.us_onset + us_duration_;

        for (std::size_t i = 0; i < n_cs_; ++i)
            o.channels[i] = in_cs && ((cur_.pattern >> i) & 1U) ? 1 : 0;
        o.channels[n_cs_] = in_us ? 1 : 0;

        std::uint8_t* d = o.channels.data() + n_cs_ + 1;
        if (patterning_) {
            for (std::size_t j = 0; j < n_distractors_; ++j) d[j] = in_cs ? trial_distractors_[j] : 0;
        } else {
            for (std::size_t j = 0; j < n_distractors_; ++j) {
                if (bernoulli(rng_, onset_prob_[j])) remaining_[j] = distractor_duration_;
                d[j] = remaining_[j] > 0 ? 1 : 0;
                if (remaining_[j] > 0) --remaining_[j];
            }
        }
        ++t_;
    }

private:
    void init(const trace_conditioning_config& c)
    {
        patterning_ = false;
        cs_duration_ = c.cs_duration;
        us_duration_ = c.us_duration;
        isi_low_ = c.isi_low;
        isi_high_ = c.isi_high;
        iti_low_ = c.iti_low;
        iti_high_ = c.iti_high;
        distractor_duration_ = c.distractor_duration;
        for (double m : c.distractor_means) onset_prob_.push_back(1.0 / m);
        remaining_.assign(onset_prob_.size(), 0);
        next_cs_onset_ = uniform_int(rng_, iti_low_, iti_high_);
    }

    void init(const noisy_patterning_config& c)
    {
        init_patterning(c.n_cs, c.n_patterns, c.noise, c.cs_duration, c.us_duration, c.isi, c.isi,
                        c.iti_low, c.iti_high);
    }

    void init(const trace_patterning_config& c)
    {
        init_patterning(c.n_cs, c.n_patterns, c.noise, c.cs_duration, c.us_duration, c.isi_low,
                        c.isi_high, c.iti_low, c.iti_high);
    }

    void init_patterning(int n_cs, int n_patterns, double noise, int cs_dur, int us_dur,
                         int isi_lo, int isi_hi, int iti_lo, int iti_hi)
    {
        patterning_ = true;
        n_cs_int_ = n_cs;
        noise_ = noise;
        cs_duration_ = cs_dur;
        us_duration_ = us_dur;
        isi_low_ = isi_lo;
        isi_high_ = isi_hi;
        iti_low_ = iti_lo;
        iti_high_ = iti_hi;
        activation_ = sample_activation_patterns(n_cs, n_patterns, rng_);
        trial_distractors_.assign(n_distractors_, 0);
        next_cs_onset_ = uniform_int(rng_, iti_low_, iti_high_);
    }

    bool is_activation(cs_pattern p) const
    {
        return std::binary_search(activation_.begin(), activation_.end(), p);
    }

    void begin_trial()
    {
        trial_record r;
        r.cs_onset = t_;
        if (patterning_) {
            r.activating = bernoulli(rng_, 0.5);
            if (r.activating) {
                r.pattern = activation_[static_cast<std::size_t>(
                    uniform_int(rng_, 0, static_cast<int>(activation_.size()) - 1))];
            } else {
                do {
                    r.pattern = sample_half_hot(n_cs_int_, rng_);
                } while (is_activation(r.pattern));
            }
            r.flipped = bernoulli(rng_, noise_);
            r.reinforced = r.activating != r.flipped;
            for (auto& d : trial_distractors_) d = bernoulli(rng_, 0.5) ? 1 : 0;
        } else {
            r.pattern = 1;
        }
        r.us_onset = t_ + uniform_int(rng_, isi_low_, isi_high_);
        next_cs_onset_ = r.us_onset + uniform_int(rng_, iti_low_, iti_high_);
        cur_ = r;
        has_trial_ = true;
        trials_.push_back(r);
    }

    env_config config_;
    rng_engine rng_;
    std::size_t n_cs_ = 0;
    std::size_t n_distractors_ = 0;

    bool patterning_ = false;
    int n_cs_int_ = 0;
    double noise_ = 0.0;
    int cs_duration_ = 4;
    int us_duration_ = 2;
    int isi_low_ = 0, isi_high_ = 0, iti_low_ = 0, iti_high_ = 0;

    // Poisson-like background distractors (trace conditioning).
    std::vector<double> onset_prob_;
    std::vector<int> remaining_;
    int distractor_duration_ = 4;

    // Trial-aligned distractors and patterns (patterning problems).
    std::vector<cs_pattern> activation_;
    std::vector<std::uint8_t> trial_distractors_;

    std::int64_t t_ = 0;
    std::int64_t next_cs_onset_ = 0;
    bool has_trial_ = false;
    trial_record cur_;
    std::vector<trial_record> trials_;
};

} // namespace ccbench
