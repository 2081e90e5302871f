// Command-line front end: run, sweep, aggregate and profile.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "ccbench/harness/sweep.hpp"

namespace fs = std::filesystem;
using namespace ccbench;
using namespace ccbench::harness;

namespace {

struct options {
    unsigned threads = 0;
    double scale = 1.0;
    std::string config;
    std::string dir = ".";
    std::size_t run_id = 0;
    int trials = 5;
    std::string out;
};

int cmd_run(const options& o)
{
    auto cfg = from_map(load_config_file(o.config));
    apply_scale(cfg, o.scale);
    const auto results = run_experiment(cfg, o.threads);
    std::cout << problem_label(cfg.env) << "  " << method_label(cfg.method) << "\n";
    if (results.size() >= 2) {
        const auto a = aggregate_runs(results);
        std::printf("MSRE %.6g +- %.3g (n=%zu)\n", a.mean, a.se, a.n);
    } else {
        std::printf("MSRE %.6g (n=1)\n", results.front().msre);
    }
    std::cout << "wrote " << (fs::path(cfg.output_dir) / "runs.csv").string() << "\n";
    return 0;
}

int cmd_sweep(const options& o)
{
    const auto spec = parse_sweep(load_config_file(o.config));
    const auto res = run_sweep(spec, o.threads, o.scale);
    const auto& best = res.points[res.best];
    std::cout << "best:";
    for (std::size_t k = 0; k < spec.keys.size(); ++k) std::cout << " " << spec.keys[k] << "=" << best.values[k];
    std::printf("  selection MSRE %.6g\n", best.score.mean);
    if (res.final_runs.size() >= 2) {
        const auto a = aggregate_runs(res.final_runs);
        std::printf("final MSRE %.6g +- %.3g (n=%zu)\n", a.mean, a.se, a.n);
    }
    std::cout << "wrote " << (fs::path(res.best_config.output_dir) / "sweep.csv").string() << "\n";
    return 0;
}

int cmd_aggregate(const options& o)
{
    if (!fs::is_directory(o.dir)) throw std::runtime_error("not a directory: " + o.dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(o.dir))
        if (e.is_regular_file() && e.path().filename() == "runs.csv") files.push_back(e.path());
    if (files.empty()) throw std::runtime_error("no runs.csv found under " + o.dir);
    std::sort(files.begin(), files.end());

    std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
    for (const auto& f : files) {
        const auto t = read_csv(f);
        const auto cp = t.column("problem"), cm = t.column("method"), cx = t.column("msre");
        for (const auto& r : t.rows) groups[{r[cp], r[cm]}].push_back(parse_double("msre", r[cx]));
    }
    for (const auto& [key, v] : groups) {
        std::cout << key.first << "  " << key.second << "  ";
        if (v.size() >= 2) {
            const auto a = aggregate_values(v);
            std::printf("%.6g +- %.3g (n=%zu)\n", a.mean, a.se, a.n);
        } else {
            std::printf("%.6g (n=1)\n", v.front());
        }
    }
    return 0;
}

int cmd_profile(const options& o)
{
    const auto path = fs::path(o.dir) / "config.yaml";
    auto cfg = from_map(load_config_file(path));
    apply_scale(cfg, o.scale);
    if (o.run_id >= static_cast<std::size_t>(cfg.n_runs))
        throw std::runtime_error("run id " + std::to_string(o.run_id) + " out of range (n_runs=" +
                                 std::to_string(cfg.n_runs) + ")");
    if (o.trials < 1) throw std::runtime_error("--trials must be >= 1");
    const auto out = execute_run(cfg, o.run_id, digest(cfg), o.trials);
    const fs::path target = o.out.empty() ? fs::path(o.dir) / ("profile_run" + std::to_string(o.run_id) + ".csv")
                                          : fs::path(o.out);
    write_profiles_csv(target, cfg, {{out.result.seed, &out.profile}}, digest(cfg));
    std::cout << "wrote " << out.profile.size() << " rows to " << target.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ccbench: online multi-step prediction benchmarks"};
    options o;
    app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
    app.add_option("--scale", o.scale, "multiply steps and run counts by this factor")
        ->check(CLI::PositiveNumber);
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run every seed of one config");
    run->add_option("--config", o.config, "config file")->required();
    auto* sweep = app.add_subcommand("sweep", "grid sweep with selection and final phases");
    sweep->add_option("--config", o.config, "sweep config file")->required();
    auto* agg = app.add_subcommand("aggregate", "mean MSRE +- SE per problem and method");
    agg->add_option("--dir", o.dir, "directory searched for runs.csv files")->required();
    auto* prof = app.add_subcommand("profile", "CS-onset aligned prediction profile of one run");
    prof->add_option("--run", o.run_id, "run index")->required();
    prof->add_option("--trials", o.trials, "number of final trials")->required();
    prof->add_option("--dir", o.dir, "output directory of a previous run (default: .)");
    prof->add_option("--out", o.out, "output CSV (default: <dir>/profile_run<id>.csv)");
    for (auto* sub : {run, sweep, agg, prof}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return e.get_exit_code() ? e.get_exit_code() : 2;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (agg->parsed()) return cmd_aggregate(o);
        return cmd_profile(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
