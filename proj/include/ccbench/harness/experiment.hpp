#pragma once

// Executing experiments: one learner per run, runs spread over a pool of
// worker threads, results gathered by run index and persisted as CSV.

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>
#include <vector>

#include "ccbench/eval.hpp"
#include "ccbench/harness/config.hpp"
#include "ccbench/harness/csv.hpp"
#include "ccbench/learn.hpp"
#include "ccbench/repr.hpp"

namespace ccbench::harness {

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0 = all cores).
/// Each index is claimed from a shared counter, so idle workers pick up the
/// next pending task. The exception of the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Largest ISI the problem can produce.
inline int max_isi(const env_config& e)
{
    return std::visit(
        [](const auto& c) -> int {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, noisy_patterning_config>) return c.isi;
            else return c.isi_high;
        },
        e);
}

inline std::int64_t profile_after(const experiment_config& c)
{
    return c.profile_after > 0 ? c.profile_after : max_isi(c.env) + 20;
}

inline std::uint64_t run_seed(const experiment_config& c, std::size_t run_index)
{
    return derive_seed(c.seed, run_index);
}

/// Trains one learner for cfg.steps steps and returns its prediction log.
inline prediction_log train(const experiment_config& cfg, std::uint64_t seed, bool record_channels)
{
    environment env(cfg.env, derive_seed(seed, streams::environment));
    const auto& m = cfg.method;
    const double tau = m.trace_decay > 0.0 ? m.trace_decay : env.discount();
    const std::size_t channels = env.n_channels();

    if (is_recurrent(m.kind)) {
        rnn_learner_config rc;
        rc.kind = to_cell_kind(m.kind);
        rc.hidden_size = m.hidden;
        rc.engine = m.engine;
        rc.truncation = m.truncation;
        rc.step_size = m.step_size;
        rc.augment = m.augment;
        rc.trace_decay = tau;
        rc.seed = derive_seed(seed, streams::parameters);
        return run_rnn_learner(env, rc, cfg.steps, record_channels);
    }

    linear_learner_config lc;
    lc.lambda = m.lambda;
    lc.step_size = m.step_size;
    switch (m.kind) {
    case method_kind::presence: {
        presence_representation r(channels);
        return run_linear_learner(env, r, lc, cfg.steps, record_channels);
    }
    case method_kind::tile_coded: {
        tile_coded_representation r(channels, tau, m.n_tilings, m.n_tiles);
        return run_linear_learner(env, r, lc, cfg.steps, record_channels);
    }
    case method_kind::microstimulus: {
        microstimulus_representation r(channels, tau, m.n_rbfs, m.sigma);
        return run_linear_learner(env, r, lc, cfg.steps, record_channels);
    }
    case method_kind::esn: {
        esn_config ec{m.hidden, m.spectral_radius, m.input_scaling, m.density};
        esn_representation r(channels, ec, derive_seed(seed, streams::representation));
        return run_linear_learner(env, r, lc, cfg.steps, record_channels);
    }
    default: throw std::logic_error("train: unhandled method kind");
    }
}

struct run_output {
    run_result result;
    std::vector<profile_row> profile;
};

/// One complete run: train, compute returns, score, and optionally profile.
inline run_output execute_run(const experiment_config& cfg, std::size_t run_index,
                              const std::string& config_digest, int profile_trials)
{
    run_output out;
    const std::uint64_t seed = run_seed(cfg, run_index);
    const bool profile = profile_trials > 0;
    const auto log = train(cfg, seed, profile);
    const auto returns = compute_returns(log.us, log.gamma, cfg.tail_epsilon);
    out.result.seed = seed;
    out.result.config_digest = config_digest;
    out.result.msre = msre(log.predictions, returns);
    out.result.curve = learning_curve(log.predictions, returns, cfg.curve_bin);
    if (profile)
        out.profile = trial_profile(log, returns, cfg.profile_before, profile_after(cfg),
                                    static_cast<std::size_t>(profile_trials));
    return out;
}

inline std::vector<run_output> execute_runs(const experiment_config& cfg, unsigned threads)
{
    const std::string dg = digest(cfg);
    std::vector<run_output> out(static_cast<std::size_t>(cfg.n_runs));
    parallel_for(out.size(), threads,
                 [&](std::size_t i) { out[i] = execute_run(cfg, i, dg, cfg.profile_trials); });
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline void write_runs_csv(const std::filesystem::path& path, const experiment_config& cfg,
                           const std::vector<run_output>& runs)
{
    csv_writer w(path);
    w.row({"config_digest", "problem", "method", "seed", "steps", "msre"});
    const auto problem = problem_label(cfg.env);
    const auto method = method_label(cfg.method);
    for (const auto& r : runs) {
        w.field(r.result.config_digest).field(problem).field(method).field(r.result.seed);
        w.field(cfg.steps).field(r.result.msre).end_row();
    }
    w.close();
}

inline void write_curves_csv(const std::filesystem::path& path, const std::vector<run_output>& runs)
{
    csv_writer w(path);
    w.row({"config_digest", "seed", "bin_start", "bin_msre"});
    for (const auto& r : runs)
        for (const auto& p : r.result.curve)
            w.field(r.result.config_digest).field(r.result.seed).field(p.bin_start).field(p.bin_msre).end_row();
    w.close();
}

/// Rows for one or more runs; cs*/d* columns follow the problem's channel counts.
inline void write_profiles_csv(const std::filesystem::path& path, const experiment_config& cfg,
                               const std::vector<std::pair<std::uint64_t, const std::vector<profile_row>*>>& runs,
                               const std::string& config_digest)
{
    csv_writer w(path);
    const std::size_t n_cs = cs_count(cfg.env), n_d = distractor_count(cfg.env);
    w.field("config_digest").field("seed").field("trial").field("offset").field("us");
    for (std::size_t i = 0; i < n_cs; ++i) w.field("cs" + std::to_string(i));
    for (std::size_t j = 0; j < n_d; ++j) w.field("d" + std::to_string(j));
    w.field("prediction").field("return").end_row();
    for (const auto& [seed, rows] : runs) {
        for (const auto& r : *rows) {
            w.field(config_digest).field(seed).field(r.trial).field(r.offset).field(static_cast<int>(r.us));
            for (std::size_t i = 0; i < n_cs; ++i) w.field(i < r.cs.size() ? static_cast<int>(r.cs[i]) : 0);
            for (std::size_t j = 0; j < n_d; ++j)
                w.field(j < r.distractors.size() ? static_cast<int>(r.distractors[j]) : 0);
            w.field(r.prediction).field(r.ret).end_row();
        }
    }
    w.close();
}

inline void prepare_output_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::runtime_error("cannot create output directory " + dir.string());
    const auto probe = dir / ".write_test";
    {
        std::ofstream f(probe);
        if (!f) throw std::runtime_error("output directory not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);
}

inline void write_experiment(const experiment_config& cfg, const std::vector<run_output>& runs)
{
    const std::filesystem::path dir(cfg.output_dir);
    prepare_output_dir(dir);
    {
        std::ofstream f(dir / "config.yaml", std::ios::binary);
        f << serialize(cfg);
        if (!f) throw std::runtime_error("error writing config.yaml");
    }
    write_runs_csv(dir / "runs.csv", cfg, runs);
    write_curves_csv(dir / "curves.csv", runs);
    if (cfg.profile_trials > 0) {
        std::vector<std::pair<std::uint64_t, const std::vector<profile_row>*>> rows;
        for (const auto& r : runs) rows.emplace_back(r.result.seed, &r.profile);
        write_profiles_csv(dir / "profiles.csv", cfg, rows, digest(cfg));
    }
}

/// Runs every seed of `cfg` and writes config.yaml, runs.csv, curves.csv and,
/// when profiling is enabled, profiles.csv into cfg.output_dir.
inline std::vector<run_result> run_experiment(const experiment_config& cfg, unsigned threads = 0)
{
    prepare_output_dir(cfg.output_dir);
    auto runs = execute_runs(cfg, threads);
    write_experiment(cfg, runs);
    std::vector<run_result> out;
    for (auto& r : runs) out.push_back(std::move(r.result));
    return out;
}

/// Shrinks steps and run counts for quick checks; at least 2 runs remain so
/// standard errors stay defined.
inline void apply_scale(experiment_config& c, double scale)
{
    if (!(scale > 0.0)) throw config_error("--scale must be > 0");
    if (scale == 1.0) return;
    c.steps = std::max<std::int64_t>(1, std::llround(static_cast<double>(c.steps) * scale));
    c.n_runs = std::max(2, static_cast<int>(std::lround(c.n_runs * scale)));
}

} // namespace ccbench::harness
