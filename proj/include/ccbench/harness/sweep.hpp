#pragma once

// Grid sweeps. A sweep config is an ordinary experiment config plus
//
//   sweep.method.step_size: [1.0e-4, 3.0e-4, 1.0e-3]
//   sweep.method.truncation: [5, 20]
//   sweep.selection_runs: 5
//   sweep.final_runs: 30
//
// Every `sweep.<key>` list overrides `<key>`. Phase 1 scores each grid point
// with selection_runs seeds; phase 2 reruns the point with the lowest mean
// MSRE using final_runs fresh seeds. Ties go to the lexicographically
// smallest hyperparameter tuple (numbers compare numerically, keys in sorted
// order).

#include <charconv>
#include <iostream>
#include <limits>

#include "ccbench/harness/experiment.hpp"

namespace ccbench::harness {

/// Stream id used to derive the phase-2 master seed from the sweep seed, so
/// final runs never reuse selection seeds.
inline constexpr std::uint64_t final_phase_stream = 0xF1A1;

struct sweep_spec {
    config_map base;                     ///< config without sweep.* keys
    std::vector<std::string> keys;       ///< swept keys, sorted
    std::vector<std::vector<std::string>> values; ///< per key, in listed order
    int selection_runs = 5;
    int final_runs = 30;
};

struct sweep_point {
    std::vector<std::string> values; ///< one per swept key
    experiment_config config;
    aggregate score;
    std::string config_digest;
};

struct sweep_result {
    std::vector<sweep_point> points;
    std::size_t best = 0;
    experiment_config best_config;
    std::vector<run_result> final_runs;
    bool argmin_on_edge = false;
};

inline sweep_spec parse_sweep(const config_map& m)
{
    sweep_spec s;
    for (const auto& [key, v] : m) {
        if (key.rfind("sweep.", 0) != 0) {
            s.base.emplace(key, v);
            continue;
        }
        const std::string target = key.substr(6);
        if (target == "selection_runs") {
            s.selection_runs = static_cast<int>(parse_int(key, v.scalar(key)));
        } else if (target == "final_runs") {
            s.final_runs = static_cast<int>(parse_int(key, v.scalar(key)));
        } else {
            if (v.items.empty()) throw config_error("config key '" + key + "': empty sweep list");
            s.keys.push_back(target);
            s.values.push_back(v.items);
        }
    }
    if (s.selection_runs < 1) throw config_error("config key 'sweep.selection_runs': must be >= 1");
    if (s.final_runs < 1) throw config_error("config key 'sweep.final_runs': must be >= 1");
    return s;
}

namespace detail {

inline bool as_number(const std::string& s, double& out)
{
    auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

/// a < b on hyperparameter tuples; numeric entries compare as numbers.
inline bool tuple_less(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    for (std::size_t i = 0; i < a.size(); ++i) {
        double x, y;
        if (as_number(a[i], x) && as_number(b[i], y)) {
            if (x != y) return x < y;
        } else if (a[i] != b[i]) {
            return a[i] < b[i];
        }
    }
    return false;
}

inline aggregate score_values(const std::vector<double>& v)
{
    if (v.size() >= 2) return aggregate_values(v);
    return {v.front(), std::numeric_limits<double>::quiet_NaN(), 1};
}

} // namespace detail

/// Index of the best point: lowest mean, ties to the smallest tuple.
inline std::size_t select_best(const std::vector<sweep_point>& points)
{
    if (points.empty()) throw std::invalid_argument("select_best: empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double a = points[i].score.mean, b = points[best].score.mean;
        if (a < b || (a == b && detail::tuple_less(points[i].values, points[best].values))) best = i;
    }
    return best;
}

/// Grid points in odometer order (last key varies fastest).
inline std::vector<sweep_point> expand_grid(const sweep_spec& s, double scale)
{
    std::vector<sweep_point> out;
    std::vector<std::size_t> idx(s.keys.size(), 0);
    while (true) {
        config_map m = s.base;
        sweep_point p;
        for (std::size_t k = 0; k < s.keys.size(); ++k) {
            const auto& v = s.values[k][idx[k]];
            p.values.push_back(v);
            m[s.keys[k]] = config_value{{v}, false};
        }
        p.config = from_map(m);
        p.config.n_runs = s.selection_runs;
        apply_scale(p.config, scale);
        if (scale != 1.0) p.config.n_runs = std::max(1, static_cast<int>(std::lround(s.selection_runs * scale)));
        p.config.profile_trials = 0;
        p.config_digest = digest(p.config);
        out.push_back(std::move(p));

        std::size_t k = s.keys.size();
        while (k > 0) {
            --k;
            if (++idx[k] < s.values[k].size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
        if (s.keys.empty()) return out;
    }
}

/// True when the argmin sits at the first or last value of a swept axis
/// with at least three values.
inline bool argmin_on_edge(const sweep_spec& s, const sweep_point& best)
{
    for (std::size_t k = 0; k < s.keys.size(); ++k) {
        if (s.values[k].size() < 3) continue;
        if (best.values[k] == s.values[k].front() || best.values[k] == s.values[k].back()) return true;
    }
    return false;
}

inline void write_sweep_csv(const std::filesystem::path& path, const sweep_spec& s,
                            const std::vector<sweep_point>& points)
{
    csv_writer w(path);
    for (const auto& k : s.keys) w.field(k);
    w.field("mean_msre").field("se").field("n_runs").field("config_digest").end_row();
    for (const auto& p : points) {
        for (const auto& v : p.values) w.field(v);
        w.field(p.score.mean).field(p.score.se).field(p.score.n).field(p.config_digest).end_row();
    }
    w.close();
}

/// Runs both phases and writes sweep.csv plus the phase-2 run artifacts into
/// the base config's output directory.
inline sweep_result run_sweep(const sweep_spec& s, unsigned threads = 0, double scale = 1.0,
                              std::ostream* warnings = &std::cerr)
{
    sweep_result res;
    res.points = expand_grid(s, scale);
    const std::filesystem::path dir(res.points.front().config.output_dir);
    prepare_output_dir(dir);

    // Flatten (point, run) pairs so all workers stay busy across the grid.
    std::vector<std::pair<std::size_t, std::size_t>> tasks;
    for (std::size_t p = 0; p < res.points.size(); ++p)
        for (int r = 0; r < res.points[p].config.n_runs; ++r) tasks.emplace_back(p, static_cast<std::size_t>(r));
    std::vector<double> scores(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t i) {
        const auto& pt = res.points[tasks[i].first];
        scores[i] = execute_run(pt.config, tasks[i].second, pt.config_digest, 0).result.msre;
    });
    for (std::size_t p = 0, i = 0; p < res.points.size(); ++p) {
        std::vector<double> v;
        for (int r = 0; r < res.points[p].config.n_runs; ++r) v.push_back(scores[i++]);
        res.points[p].score = detail::score_values(v);
    }
    write_sweep_csv(dir / "sweep.csv", s, res.points);

    res.best = select_best(res.points);
    res.argmin_on_edge = argmin_on_edge(s, res.points[res.best]);
    if (res.argmin_on_edge && warnings) {
        *warnings << "warning: best grid point lies on the edge of the grid (";
        for (std::size_t k = 0; k < s.keys.size(); ++k)
            *warnings << (k ? ", " : "") << s.keys[k] << "=" << res.points[res.best].values[k];
        *warnings << "); consider widening the sweep\n";
    }

    auto best = from_map([&] {
        config_map m = s.base;
        for (std::size_t k = 0; k < s.keys.size(); ++k)
            m[s.keys[k]] = config_value{{res.points[res.best].values[k]}, false};
        return m;
    }());
    best.n_runs = s.final_runs;
    best.seed = derive_seed(best.seed, final_phase_stream);
    apply_scale(best, scale);
    res.best_config = best;
    res.final_runs = run_experiment(best, threads);
    return res;
}

} // namespace ccbench::harness
