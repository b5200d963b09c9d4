// Command-line front end.
//
//   evodrift run      --config cfg.json [--out DIR] [--seed N] [--threads N]
//   evodrift tabulate --config cfg.json [--out DIR] [--mask TRITS] [--threads N]
//   evodrift analyze  --config cfg.json [--out DIR]
//   evodrift verify
//
// Exit code 0 on full success; otherwise nonzero with a machine-readable
// failure summary (one JSON object) on stderr.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "evodrift/config.hpp"
#include "evodrift/harness.hpp"
#include "evodrift/selfcheck.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string mask;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

evodrift::ExperimentConfig load_effective_config(const CommonOpts& opts) {
    evodrift::ExperimentConfig cfg = evodrift::load_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (!opts.mask.empty()) {
        evodrift::GeneMask::parse(opts.mask);
        cfg.mask = opts.mask;
    }
    if (opts.threads > 0) cfg.threads = opts.threads;
    if (opts.seed_set) cfg.base_seed = opts.seed;
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_config = true) {
    auto* config = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
    if (need_config) config->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "base seed (overrides config)")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
    cmd->add_option("--mask", opts.mask, "18-char gene-pinning mask, '*' free / '0' pinned");
}

int fail(const std::string& stage, const std::string& message) {
    nlohmann::json j;
    j["status"] = "error";
    j["stage"] = stage;
    j["message"] = message;
    std::cerr << j.dump() << std::endl;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic evolvability-dynamics simulation toolkit"};
    app.require_subcommand(1);

    CommonOpts run_opts, tab_opts, analyze_opts;
    auto* run_cmd = app.add_subcommand("run", "execute an experiment battery");
    add_common(run_cmd, run_opts);
    auto* tab_cmd = app.add_subcommand("tabulate", "build a genotype lookup table");
    add_common(tab_cmd, tab_opts);
    auto* analyze_cmd =
        app.add_subcommand("analyze", "recompute pooled analysis from stored run records");
    add_common(analyze_cmd, analyze_opts);
    app.add_subcommand("verify", "run the built-in oracle/self-test suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const evodrift::ExperimentConfig cfg = load_effective_config(run_opts);
            const evodrift::ExperimentResult result = evodrift::run_experiment(cfg);
            std::size_t failed = 0;
            for (const auto& r : result.runs) {
                if (!r.ok) {
                    ++failed;
                    std::cerr << "run " << r.run_index << " failed: " << r.error << "\n";
                }
            }
            std::cout << "wrote " << result.out_dir.string() << " ("
                      << result.runs.size() - failed << "/" << result.runs.size()
                      << " runs ok)\n";
            if (failed > 0)
                return fail("run", std::to_string(failed) + " run(s) failed; see manifest.json");
            return 0;
        }
        if (tab_cmd->parsed()) {
            const evodrift::ExperimentConfig cfg = load_effective_config(tab_opts);
            const evodrift::TableBuildResult result = evodrift::build_table(cfg);
            std::cout << "tabulated " << result.space_size << " genotypes into "
                      << result.shard_files.size() << " shard(s); manifest at "
                      << result.manifest_path.string() << "\n";
            return 0;
        }
        if (analyze_cmd->parsed()) {
            const evodrift::ExperimentConfig cfg = load_effective_config(analyze_opts);
            evodrift::recompute_analysis(cfg);
            std::cout << "recomputed analysis in " << cfg.out_dir << "\n";
            return 0;
        }
        // verify
        const auto checks = evodrift::run_self_checks();
        std::size_t failures = 0;
        for (const auto& c : checks) {
            std::printf("[%s] %s: %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                        c.detail.c_str());
            if (!c.pass) ++failures;
        }
        if (failures > 0)
            return fail("verify", std::to_string(failures) + " self-check(s) failed");
        return 0;
    } catch (const std::exception& e) {
        return fail(app.get_subcommands().empty() ? "cli"
                                                  : app.get_subcommands().front()->get_name(),
                    e.what());
    }
}
