// Experiment CLI: run | oracle | verify | sweep.
// Exit codes: 0 success, 2 config error, 3 runtime failure.

#include "cliphinge/config.hpp"
#include "cliphinge/envs.hpp"
#include "cliphinge/metrics.hpp"
#include "cliphinge/neural.hpp"
#include "cliphinge/oracle.hpp"
#include "cliphinge/tabular.hpp"
#include "cliphinge/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

using namespace cliphinge;

struct CommonOpts {
    std::string config_path;
    std::string out;
    std::string format;
    std::optional<long> seed;
    bool quiet = false;
};

ExperimentConfig resolve(const CommonOpts& opts) {
    ExperimentConfig cfg =
        opts.config_path.empty() ? ExperimentConfig{} : parse_config_file(opts.config_path);
    if (const char* env_seed = std::getenv("CLIP_HINGE_SEED"))
        cfg.seed = static_cast<std::uint64_t>(std::strtoull(env_seed, nullptr, 10));
    if (opts.seed)
        cfg.seed = static_cast<std::uint64_t>(*opts.seed);
    if (!opts.out.empty())
        cfg.out = opts.out;
    if (!opts.format.empty()) {
        if (opts.format == "csv") cfg.format = MetricsFormat::csv;
        else if (opts.format == "jsonl") cfg.format = MetricsFormat::jsonl;
        else throw ConfigError("config: format must be csv or jsonl");
    }
    cfg.tabular.rng_seed = cfg.seed;
    cfg.neural.rng_seed = cfg.seed;
    return cfg;
}

void execute_once(const ExperimentConfig& cfg, const std::string& out_path, bool quiet) {
    TabularMdp mdp = build_env(cfg.env);
    std::vector<RunMetrics> metrics;
    if (cfg.mode == "tabular") {
        metrics = run_tabular(mdp, cfg.tabular).metrics;
    } else if (cfg.mode == "neural") {
        metrics = run_neural(mdp, cfg.neural).metrics;
    } else {
        throw ConfigError("config: run requires tabular or neural mode");
    }
    write_metrics_file(out_path, metrics, cfg.format, cfg.header_lines());
    if (!quiet)
        std::cerr << "wrote " << metrics.size() << " records to " << out_path << " ("
                  << metrics.back().wall_ms << " ms)\n";
}

int cmd_run(const CommonOpts& opts) {
    ExperimentConfig cfg = resolve(opts);
    if (cfg.mode == "verify") {
        bool all = true;
        for (const auto& r : run_verify_suites(cfg.seed)) {
            std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
            all = all && r.pass;
        }
        return all ? 0 : 3;
    }
    cfg.validate();
    execute_once(cfg, cfg.out, opts.quiet);
    return 0;
}

int cmd_oracle(const CommonOpts& opts) {
    ExperimentConfig cfg = resolve(opts);
    TabularMdp mdp = build_env(cfg.env);
    OptimalSolution opt = solve_optimal(mdp);
    std::cout << "states " << mdp.n_states << " actions " << mdp.n_actions << " gamma "
              << format_double(mdp.gamma) << "\n";
    for (int s = 0; s < mdp.n_states; ++s) {
        int best = 0;
        for (int a = 0; a < mdp.n_actions; ++a)
            if (opt.pi_star.probs[s][a] > 0.5)
                best = a;
        std::cout << "s" << s << " v* " << format_double(opt.v_star[s]) << " pi* a" << best
                  << " nu* " << format_double(opt.nu_star[s]) << "\n";
    }
    return 0;
}

int cmd_verify(const CommonOpts& opts) {
    ExperimentConfig cfg = resolve(opts);
    bool all = true;
    for (const auto& r : run_verify_suites(cfg.seed)) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all = all && r.pass;
    }
    if (!all)
        std::cerr << "error: verify: one or more suites failed\n";
    return all ? 0 : 3;
}

int cmd_sweep(const CommonOpts& opts) {
    ExperimentConfig cfg = resolve(opts);
    if (cfg.sweep_param.empty())
        throw ConfigError("config: sweep requires a [sweep] section");
    cfg.validate();
    std::string base = cfg.out;
    std::string stem = base, ext;
    if (size_t dot = base.rfind('.'); dot != std::string::npos) {
        stem = base.substr(0, dot);
        ext = base.substr(dot);
    }
    for (size_t i = 0; i < cfg.sweep_values.size(); ++i) {
        ExperimentConfig cell = cfg;
        double v = cfg.sweep_values[i];
        if (cfg.sweep_param == "T")
            cell.neural.T = static_cast<int>(v);
        else if (cfg.sweep_param == "epsilon") {
            cell.tabular.classifier.epsilon = v;
            cell.neural.epsilon = v;
        }
        cell.validate();
        std::string path = stem + "_cell" + std::to_string(i) + ext;
        execute_once(cell, path, opts.quiet);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized PPO-Clip experiments: hinge-loss objectives, EMDA policy search, "
                 "tabular and neural agents with exact tabular oracles"};
    app.require_subcommand(1);
    CommonOpts opts;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", opts.config_path, "experiment config file");
        if (need_config)
            c->required();
        sub->add_option("--out", opts.out, "output metrics path");
        sub->add_option("--format", opts.format, "csv or jsonl");
        sub->add_option("--seed", opts.seed, "master seed (overrides config and CLIP_HINGE_SEED)");
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
    };

    CLI::App* run = app.add_subcommand("run", "execute an experiment from a config file");
    add_common(run, true);
    CLI::App* oracle = app.add_subcommand("oracle", "solve and print the optimal solution");
    add_common(oracle, true);
    CLI::App* verify = app.add_subcommand("verify", "run the property suites");
    add_common(verify, false);
    CLI::App* sweep = app.add_subcommand("sweep", "grid over T or epsilon, one file per cell");
    add_common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(opts);
        if (oracle->parsed()) return cmd_oracle(opts);
        if (verify->parsed()) return cmd_verify(opts);
        if (sweep->parsed()) return cmd_sweep(opts);
    } catch (const cliphinge::ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
