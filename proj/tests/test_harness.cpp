#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ccbench/harness/sweep.hpp"

namespace {

using namespace ccbench;
using namespace ccbench::harness;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("ccbench_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

experiment_config small_config(const fs::path& dir)
{
    return parse("env.kind: trace_conditioning\n"
                 "env.isi_preset: short\n"
                 "method.kind: microstimulus\n"
                 "run.steps: 5000\n"
                 "run.n_runs: 4\n"
                 "run.seed: 42\n"
                 "run.curve_bin: 1000\n"
                 "output.dir: " + dir.string() + "\n");
}

TEST(Seeds, DerivationIsInjectiveOverRunIndices)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 100'000; ++i) ASSERT_TRUE(seen.insert(derive_seed(7, i)).second);
    EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
    // the three streams of a run are distinct
    const auto s = derive_seed(7, 3);
    EXPECT_NE(derive_seed(s, streams::environment), derive_seed(s, streams::representation));
    EXPECT_NE(derive_seed(s, streams::representation), derive_seed(s, streams::parameters));
}

TEST(Config, RoundTripAllProblemKinds)
{
    const char* docs[] = {
        "env.kind: trace_conditioning\nenv.isi_preset: long\nmethod.kind: lstm\nmethod.engine: rtrl\n",
        "env.kind: noisy_patterning\nenv.difficulty: hard\nmethod.kind: esn\nmethod.hidden: 1000\n"
        "method.spectral_radius: 0.999\nmethod.density: 0.05\n",
        "env.kind: trace_patterning\nenv.isi_preset: medium\nenv.difficulty: easy\nmethod.kind: tile_coded\n"
        "method.n_tiles: 16\nmethod.step_size: 3.0e-6\nrun.seed: 18446744073709551615\n",
        "env.kind: trace_conditioning\nenv.distractor_means: [5, 7.5]\nmethod.kind: gru\n"
        "method.augment: true\nmethod.trace_decay: 0.8\nmethod.truncation: 40\n",
    };
    for (const char* d : docs) {
        const auto c = parse(d);
        const auto text = serialize(c);
        EXPECT_EQ(parse(text), c) << text;
        EXPECT_EQ(serialize(parse(text)), text);
        EXPECT_EQ(digest(parse(text)), digest(c));
    }
}

TEST(Config, PresetsExpand)
{
    const auto c = parse("env.kind: noisy_patterning\nenv.difficulty: hard\n");
    const auto& np = std::get<noisy_patterning_config>(c.env);
    EXPECT_EQ(np.n_patterns, 16);
    EXPECT_EQ(np.n_distractors, 20);
    EXPECT_DOUBLE_EQ(np.noise, 0.15);
    const auto o = parse("env.kind: noisy_patterning\nenv.difficulty: hard\nenv.noise: 0.2\n");
    EXPECT_DOUBLE_EQ(std::get<noisy_patterning_config>(o.env).noise, 0.2);
}

TEST(Config, MethodDefaults)
{
    EXPECT_EQ(parse("method.kind: lstm\n").method.lambda, 0.0);
    EXPECT_EQ(parse("method.kind: presence\n").method.lambda, 0.9);
    EXPECT_EQ(parse("method.kind: esn\n").method.hidden, 100);
    EXPECT_EQ(parse("").steps, 2'000'000);
}

TEST(Config, ErrorsNameTheKey)
{
    auto message = [](const std::string& text) {
        try {
            parse(text);
        } catch (const config_error& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("method.truncaton: 5\n").find("method.truncaton"), std::string::npos);
    EXPECT_NE(message("method.step_size: fast\n").find("method.step_size"), std::string::npos);
    EXPECT_NE(message("env.isi_preset: huge\n").find("env.isi_preset"), std::string::npos);
    EXPECT_NE(message("method.kind: lstm\nmethod.lambda: 0.9\n").find("method.lambda"), std::string::npos);
    EXPECT_NE(message("env.kind: noisy_patterning\nenv.n_cs: 4\nenv.n_patterns: 6\n").find("n_patterns"),
              std::string::npos);
    EXPECT_NE(message("- a\n- b\n").find("malformed"), std::string::npos);
    EXPECT_THROW(load_config_file("definitely_missing.yaml"), config_error);
}

TEST(Config, DigestIgnoresOutputDirOnly)
{
    auto a = small_config("x"), b = small_config("y");
    EXPECT_EQ(digest(a), digest(b));
    b.method.step_size = 2e-3;
    EXPECT_NE(digest(a), digest(b));
    EXPECT_EQ(digest(a).size(), 16u);
}

TEST(Experiment, WritesCsvSchemas)
{
    const auto dir = scratch("schemas");
    auto cfg = small_config(dir);
    cfg.profile_trials = 2;
    const auto results = run_experiment(cfg, 1);
    ASSERT_EQ(results.size(), 4u);

    const auto runs = read_csv(dir / "runs.csv");
    EXPECT_EQ(runs.header, (std::vector<std::string>{"config_digest", "problem", "method", "seed", "steps", "msre"}));
    ASSERT_EQ(runs.rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(runs.rows[i][0], digest(cfg));
        EXPECT_EQ(runs.rows[i][3], std::to_string(derive_seed(42, i)));
        EXPECT_EQ(parse_double("msre", runs.rows[i][5]), results[i].msre);
    }
    const auto curves = read_csv(dir / "curves.csv");
    EXPECT_EQ(curves.header, (std::vector<std::string>{"config_digest", "seed", "bin_start", "bin_msre"}));
    EXPECT_EQ(curves.rows.size(), 4u * 5u);

    const auto prof = read_csv(dir / "profiles.csv");
    EXPECT_EQ(prof.header.front(), "config_digest");
    EXPECT_EQ(prof.header[5], "cs0");
    EXPECT_EQ(prof.header[6], "d0");
    EXPECT_EQ(prof.header.back(), "return");
    EXPECT_EQ(prof.header.size(), 5u + 1u + 10u + 2u);
    EXPECT_FALSE(prof.rows.empty());

    EXPECT_EQ(parse(slurp(dir / "config.yaml")), cfg);
}

TEST(Experiment, RepeatableAndThreadCountIndependent)
{
    const auto d1 = scratch("det1"), d2 = scratch("det2"), d3 = scratch("det3");
    run_experiment(small_config(d1), 1);
    run_experiment(small_config(d2), 1);
    run_experiment(small_config(d3), 3);
    const auto a = slurp(d1 / "runs.csv");
    EXPECT_EQ(a, slurp(d2 / "runs.csv"));
    EXPECT_EQ(a, slurp(d3 / "runs.csv"));
    EXPECT_EQ(slurp(d1 / "curves.csv"), slurp(d3 / "curves.csv"));
}

TEST(Experiment, EveryMethodRuns)
{
    for (const char* m : {"presence", "tile_coded", "microstimulus", "esn", "vanilla", "lstm", "gru"}) {
        auto cfg = small_config(scratch(std::string("m_") + m));
        cfg.method.kind = parse_method_kind(m);
        cfg.method.lambda = is_recurrent(cfg.method.kind) ? 0.0 : 0.9;
        cfg.method.hidden = 6;
        cfg.method.truncation = 3;
        cfg.steps = 1500;
        cfg.n_runs = 2;
        const auto r = run_experiment(cfg, 1);
        for (const auto& x : r) EXPECT_TRUE(std::isfinite(x.msre)) << m;
    }
}

TEST(Experiment, UnwritableDirectory)
{
    const auto file = scratch("blocker");
    std::ofstream(file) << "x";
    auto cfg = small_config(file / "sub");
    EXPECT_THROW(run_experiment(cfg, 1), std::runtime_error);
}

TEST(Experiment, ScaleShrinksBudget)
{
    auto cfg = small_config("x");
    cfg.steps = 2'000'000;
    cfg.n_runs = 30;
    apply_scale(cfg, 0.1);
    EXPECT_EQ(cfg.steps, 200'000);
    EXPECT_EQ(cfg.n_runs, 3);
    apply_scale(cfg, 0.01);
    EXPECT_EQ(cfg.n_runs, 2);
    EXPECT_THROW(apply_scale(cfg, 0.0), config_error);
}

TEST(ParallelFor, VisitsEveryIndexAndPropagatesErrors)
{
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                 std::runtime_error);
}

TEST(Sweep, TieBreakPicksSmallestTuple)
{
    std::vector<sweep_point> pts(3);
    pts[0].values = {"0.001", "20"};
    pts[1].values = {"0.001", "5"}; // numerically smaller than "20" although not as a string
    pts[2].values = {"0.0003", "40"};
    for (auto& p : pts) p.score.mean = 0.5;
    EXPECT_EQ(select_best(pts), 2u);
    pts[2].score.mean = 0.6;
    EXPECT_EQ(select_best(pts), 1u);
    pts[0].score.mean = 0.4;
    EXPECT_EQ(select_best(pts), 0u);
}

TEST(Sweep, EqualConfigsTieDeterministically)
{
    // Both grid values describe the same learner, so scores tie exactly.
    const auto dir = scratch("tie");
    auto m = parse_config_text("env.isi_preset: short\nmethod.kind: presence\nrun.steps: 3000\nrun.seed: 5\n"
                               "sweep.method.lambda: [0.9, 0.90]\nsweep.selection_runs: 2\nsweep.final_runs: 2\n"
                               "output.dir: " + dir.string() + "\n");
    const auto spec = parse_sweep(m);
    std::ostringstream warn;
    const auto res = run_sweep(spec, 1, 1.0, &warn);
    ASSERT_EQ(res.points.size(), 2u);
    EXPECT_EQ(res.points[0].score.mean, res.points[1].score.mean);
    EXPECT_EQ(res.best, 0u);
    EXPECT_TRUE(warn.str().empty());
}

TEST(Sweep, SinglePointGridAndArtifacts)
{
    const auto dir = scratch("single");
    auto m = parse_config_text("env.isi_preset: short\nmethod.kind: microstimulus\nrun.steps: 4000\nrun.seed: 9\n"
                               "sweep.method.step_size: [0.001]\nsweep.selection_runs: 2\nsweep.final_runs: 3\n"
                               "output.dir: " + dir.string() + "\n");
    const auto spec = parse_sweep(m);
    const auto res = run_sweep(spec, 2, 1.0, nullptr);
    EXPECT_EQ(res.best, 0u);
    EXPECT_EQ(res.final_runs.size(), 3u);
    EXPECT_EQ(res.best_config.seed, derive_seed(9, final_phase_stream));
    const auto sw = read_csv(dir / "sweep.csv");
    EXPECT_EQ(sw.header, (std::vector<std::string>{"method.step_size", "mean_msre", "se", "n_runs", "config_digest"}));
    EXPECT_EQ(sw.rows.size(), 1u);
    EXPECT_EQ(read_csv(dir / "runs.csv").rows.size(), 3u);
}

TEST(Sweep, GridOrderAndEdgeWarning)
{
    const auto dir = scratch("grid");
    auto m = parse_config_text("env.isi_preset: short\nmethod.kind: presence\nrun.steps: 3000\n"
                               "sweep.method.step_size: [0.00001, 0.00002, 0.00003]\n"
                               "sweep.method.lambda: [0.0, 0.5]\nsweep.selection_runs: 2\nsweep.final_runs: 2\n"
                               "output.dir: " + dir.string() + "\n");
    const auto spec = parse_sweep(m);
    ASSERT_EQ(spec.keys, (std::vector<std::string>{"method.lambda", "method.step_size"}));
    const auto grid = expand_grid(spec, 1.0);
    ASSERT_EQ(grid.size(), 6u);
    EXPECT_EQ(grid[0].values, (std::vector<std::string>{"0.0", "0.00001"}));
    EXPECT_EQ(grid[1].values, (std::vector<std::string>{"0.0", "0.00002"}));
    EXPECT_EQ(grid[3].values, (std::vector<std::string>{"0.5", "0.00001"}));
    std::ostringstream warn;
    const auto res = run_sweep(spec, 1, 1.0, &warn);
    // tiny step sizes: the largest one wins, which sits on the grid edge
    EXPECT_EQ(res.points[res.best].values[1], "0.00003");
    EXPECT_TRUE(res.argmin_on_edge);
    EXPECT_NE(warn.str().find("edge"), std::string::npos);
}

} // namespace
