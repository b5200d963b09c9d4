#pragma once

// Run orchestration: executes a battery of independent simulations (parallel
// across runs, one derived random stream per run index), writes per-run
// series/population CSVs, pools the final populations for the cross-run
// analysis outputs, and records everything in a run manifest. Outcomes are
// merged in run-index order, so the statistical outputs are byte-identical
// no matter how the runs were scheduled. A failed run is recorded in the
// manifest and the rest of the battery continues.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evodrift/abstract.hpp"
#include "evodrift/analysis.hpp"
#include "evodrift/config.hpp"
#include "evodrift/lookup_table.hpp"
#include "evodrift/neat.hpp"
#include "evodrift/parallel.hpp"
#include "evodrift/table_dynamics.hpp"

namespace evodrift {

inline std::string iso8601_utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ConfigError("short write: " + path.string());
}

struct RunOutcome {
    std::uint64_t run_index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<std::string> files;  // relative to the output directory
    std::uint64_t estimation_evaluations = 0;  // practical model only
};

struct ExperimentResult {
    std::filesystem::path out_dir;
    std::vector<RunOutcome> runs;
    std::vector<std::string> battery_files;
    std::string manifest_file;

    bool all_ok() const {
        for (const auto& r : runs)
            if (!r.ok) return false;
        return !runs.empty();
    }
};

namespace detail {

inline std::string run_file_name(std::uint64_t index, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "run_%03llu_%s", static_cast<unsigned long long>(index),
                  suffix);
    return buf;
}

struct BatteryData {
    std::vector<std::optional<RunRecord>> records;
    std::vector<Population> abstract_finals;          // abstract models
    std::vector<std::vector<CellOrganism>> cell_finals;  // table + practical models
};

// Origin of the distance profile: the niche of the maze start for the robot
// models, the lattice origin for the abstract ones.
inline std::uint16_t battery_origin_cell(const ExperimentConfig& cfg) {
    if (cfg.is_table_model()) {
        const LookupTable table = load_table(cfg.table_manifest);
        const Maze maze = load_maze(table.maze_path, table.robot.robot_radius);
        return niche_of(maze.start, maze.bounds).cell_id();
    }
    if (cfg.is_neat() && !cfg.maze_path.empty()) {
        const Maze maze = load_maze(cfg.maze_path, cfg.robot.robot_radius);
        return niche_of(maze.start, maze.bounds).cell_id();
    }
    return 0;
}

inline void write_battery_analysis(const ExperimentConfig& cfg,
                                   const std::filesystem::path& out_dir,
                                   const BatteryData& data, std::uint16_t origin_cell,
                                   ExperimentResult& result) {
    std::vector<RunRecord> ok_records;
    for (const auto& rec : data.records)
        if (rec.has_value()) ok_records.push_back(*rec);
    if (ok_records.empty()) return;

    const AggregateSeries agg = aggregate_runs(ok_records);
    write_text_file(out_dir / "aggregate.csv", aggregate_to_csv(agg));
    result.battery_files.push_back("aggregate.csv");

    auto emit_profile = [&](const auto& pool) {
        write_text_file(out_dir / "heatmap.csv", heatmap_to_csv(pool.heatmap()));
        const DistanceProfile profile = pool.distance_profile();
        write_text_file(out_dir / "distance_profile.csv", distance_profile_to_csv(profile));
        write_text_file(out_dir / "correlations.json", distance_correlations_to_json(profile));
        result.battery_files.push_back("heatmap.csv");
        result.battery_files.push_back("distance_profile.csv");
        result.battery_files.push_back("correlations.json");
    };

    if (cfg.is_abstract()) {
        NichePool pool(cfg.distance_metric, 0.0, 0.0);
        bool any = false;
        for (const auto& pop : data.abstract_finals) {
            if (!pop.organisms.empty()) any = true;
            pool.add(pop);
        }
        if (any) emit_profile(pool);
    } else {
        CellPool pool(origin_cell, cfg.distance_metric);
        bool any = false;
        for (const auto& finals : data.cell_finals) {
            for (const auto& org : finals) {
                pool.add(org.cell, org.evolvability);
                any = true;
            }
        }
        if (any) emit_profile(pool);
    }
}

inline void write_run_manifest(const ExperimentConfig& cfg, const std::string& started,
                               ExperimentResult& result) {
    nlohmann::json j;
    j["format"] = "evodrift-run-manifest";
    j["code_version"] = kVersion;
    j["config"] = config_to_json(cfg);
    j["config_digest"] = config_digest(cfg);
    j["started"] = started;
    j["finished"] = iso8601_utc_now();
    j["runs"] = nlohmann::json::array();
    for (const auto& r : result.runs) {
        nlohmann::json rj;
        rj["index"] = r.run_index;
        rj["seed"] = r.seed;
        rj["ok"] = r.ok;
        if (!r.error.empty()) rj["error"] = r.error;
        rj["files"] = r.files;
        if (cfg.is_neat()) rj["estimation_evaluations"] = r.estimation_evaluations;
        j["runs"].push_back(rj);
    }
    j["battery_files"] = result.battery_files;
    j["all_ok"] = result.all_ok();
    write_text_file(result.out_dir / "manifest.json", j.dump(2) + "\n");
    result.manifest_file = "manifest.json";
}

}  // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("run: no output directory configured");
    const std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);
    const std::string started = iso8601_utc_now();
    const std::uint64_t interval = cfg.effective_record_interval();

    ExperimentResult result;
    result.out_dir = out_dir;
    result.runs.resize(cfg.runs);

    detail::BatteryData data;
    data.records.resize(cfg.runs);
    if (cfg.is_abstract()) {
        data.abstract_finals.resize(cfg.runs);
    } else {
        data.cell_finals.resize(cfg.runs);
    }

    // Shared read-only inputs loaded once.
    std::optional<LookupTable> table;
    std::optional<ReducedSpace> space;
    std::optional<Maze> maze;
    std::uint16_t origin_cell = 0;
    if (cfg.is_table_model()) {
        table = load_table(cfg.table_manifest);
        space.emplace(table->mask);
        const Maze table_maze = load_maze(table->maze_path, table->robot.robot_radius);
        origin_cell = niche_of(table_maze.start, table_maze.bounds).cell_id();
    }
    if (cfg.is_neat()) {
        maze = load_maze(cfg.maze_path, cfg.robot.robot_radius);
        origin_cell = niche_of(maze->start, maze->bounds).cell_id();
    }

    parallel_tasks(cfg.runs, cfg.threads, [&](std::uint64_t i) {
        RunOutcome& outcome = result.runs[i];
        outcome.run_index = i;
        outcome.seed = derive_seed(cfg.base_seed, i);
        try {
            const std::string series_name = detail::run_file_name(i, "series.csv");
            const std::string final_name = detail::run_file_name(i, "final_population.csv");
            switch (cfg.model) {
                case ModelKind::abstract_drift:
                case ModelKind::abstract_niched: {
                    const AbstractVariant variant = cfg.model == ModelKind::abstract_drift
                                                        ? AbstractVariant::drift
                                                        : AbstractVariant::niched;
                    AbstractRunResult run =
                        run_abstract(cfg.abstract, variant, outcome.seed, interval);
                    write_text_file(out_dir / series_name, run_record_to_csv(run.record));
                    outcome.files.push_back(series_name);
                    if (cfg.save_final_populations) {
                        write_text_file(out_dir / final_name,
                                        abstract_final_to_csv(run.final_population));
                        outcome.files.push_back(final_name);
                    }
                    data.records[i] = std::move(run.record);
                    data.abstract_finals[i] = std::move(run.final_population);
                    break;
                }
                case ModelKind::robot_drift:
                case ModelKind::robot_niched: {
                    TableRunResult run =
                        cfg.model == ModelKind::robot_drift
                            ? run_robot_drift(table->records, *space, cfg.robot_drift,
                                              outcome.seed, interval)
                            : run_robot_niched(table->records, *space, cfg.robot_drift,
                                               outcome.seed, interval);
                    write_text_file(out_dir / series_name, run_record_to_csv(run.record));
                    outcome.files.push_back(series_name);
                    std::vector<CellOrganism> finals;
                    finals.reserve(run.final_population.size());
                    for (std::uint32_t id : run.final_population) {
                        const LookupRecord& rec = table->records[id];
                        finals.push_back(
                            CellOrganism{rec.niche, static_cast<double>(rec.evolvability)});
                    }
                    if (cfg.save_final_populations) {
                        write_text_file(out_dir / final_name, cell_final_to_csv(finals));
                        outcome.files.push_back(final_name);
                    }
                    data.records[i] = std::move(run.record);
                    data.cell_finals[i] = std::move(finals);
                    break;
                }
                case ModelKind::neat_niched:
                case ModelKind::neat_random_control: {
                    const std::string genomes_name = detail::run_file_name(i, "genomes.jsonl");
                    std::ofstream genomes(out_dir / genomes_name, std::ios::trunc);
                    if (!genomes)
                        throw ConfigError("cannot write genome audit file: " + genomes_name);
                    std::uint64_t last_checkpoint = 0;
                    std::vector<CellOrganism> last_sample;
                    auto sink = [&](const NeatCheckpointSample& s) {
                        nlohmann::json sj;
                        sj["checkpoint"] = s.checkpoint;
                        sj["niche"] = s.niche;
                        sj["evolvability"] = s.evolvability;
                        sj["genome"] = neat_genome_to_json(*s.genome);
                        genomes << sj.dump() << '\n';
                        if (s.checkpoint != last_checkpoint) {
                            last_checkpoint = s.checkpoint;
                            last_sample.clear();
                        }
                        last_sample.push_back(
                            CellOrganism{s.niche, static_cast<double>(s.evolvability)});
                    };
                    NeatRunResult run =
                        run_neat_niched(*maze, cfg.robot, cfg.neat, outcome.seed, sink);
                    outcome.files.push_back(genomes_name);
                    outcome.estimation_evaluations = run.estimation_evaluations;
                    write_text_file(out_dir / series_name, run_record_to_csv(run.record));
                    outcome.files.push_back(series_name);
                    if (cfg.save_final_populations) {
                        write_text_file(out_dir / final_name, cell_final_to_csv(last_sample));
                        outcome.files.push_back(final_name);
                    }
                    data.records[i] = std::move(run.record);
                    data.cell_finals[i] = std::move(last_sample);
                    break;
                }
            }
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.ok = false;
            outcome.error = e.what();
            data.records[i].reset();
        }
    });

    detail::write_battery_analysis(cfg, out_dir, data, origin_cell, result);
    detail::write_run_manifest(cfg, started, result);
    return result;
}

// ---------------------------------------------------------------------------
// Lookup-table build
// ---------------------------------------------------------------------------

struct TableBuildResult {
    std::filesystem::path manifest_path;
    std::vector<std::string> shard_files;
    std::uint64_t space_size = 0;
};

// Tabulates the (possibly reduced) space and writes worker-count shards plus
// a manifest. Different worker counts shard differently but always merge to
// the identical logical table.
inline TableBuildResult build_table(const ExperimentConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("tabulate: no output directory configured");
    if (cfg.maze_path.empty()) throw ConfigError("tabulate: no maze file configured");
    const GeneMask mask = cfg.mask.empty() ? GeneMask::all_free() : GeneMask::parse(cfg.mask);
    const ReducedSpace space(mask);
    const Maze maze = load_maze(cfg.maze_path, cfg.robot.robot_radius);
    const unsigned threads = resolve_threads(cfg.threads);

    const std::filesystem::path out_dir(cfg.out_dir);
    std::filesystem::create_directories(out_dir);

    const std::vector<std::uint16_t> niches = tabulate_niches(maze, cfg.robot, space, threads);

    TableBuildResult result;
    result.space_size = space.size();
    TableManifest manifest;
    manifest.mask = mask;
    manifest.robot = cfg.robot;

    const std::uint64_t shard_size = (space.size() + threads - 1) / threads;
    for (std::uint64_t start = 0, k = 0; start < space.size(); start += shard_size, ++k) {
        const std::uint64_t end = std::min<std::uint64_t>(space.size(), start + shard_size);
        const std::vector<LookupRecord> records =
            records_from_niches(space, niches, start, end, threads);
        char name[32];
        std::snprintf(name, sizeof(name), "shard_%04llu.evlt", static_cast<unsigned long long>(k));
        write_shard_file(out_dir / name, start, records);
        manifest.shards.push_back(TableShardEntry{name, start, end - start});
        result.shard_files.push_back(name);
    }

    // The table is self-contained: the maze it was built from travels with it.
    std::filesystem::copy_file(cfg.maze_path, out_dir / "maze.txt",
                               std::filesystem::copy_options::overwrite_existing);
    manifest.maze_file = "maze.txt";
    manifest.maze_digest = file_digest(out_dir / "maze.txt");

    result.manifest_path = out_dir / "manifest.json";
    write_table_manifest(result.manifest_path, manifest);
    return result;
}

// Recomputes the pooled analysis outputs from the per-run CSVs of a finished
// battery directory.
inline void recompute_analysis(const ExperimentConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("analyze: no output directory configured");
    const std::filesystem::path out_dir(cfg.out_dir);
    ExperimentResult result;
    result.out_dir = out_dir;
    detail::BatteryData data;
    data.records.resize(cfg.runs);
    if (cfg.is_abstract()) {
        data.abstract_finals.resize(cfg.runs);
    } else {
        data.cell_finals.resize(cfg.runs);
    }
    for (std::uint64_t i = 0; i < cfg.runs; ++i) {
        const std::filesystem::path series = out_dir / detail::run_file_name(i, "series.csv");
        const std::filesystem::path fin = out_dir / detail::run_file_name(i, "final_population.csv");
        if (!std::filesystem::exists(series)) continue;  // failed run: skip
        data.records[i] = load_run_record(series.string());
        if (std::filesystem::exists(fin)) {
            std::ifstream in(fin);
            if (cfg.is_abstract()) {
                data.abstract_finals[i] = abstract_final_from_csv(in);
            } else {
                data.cell_finals[i] = cell_final_from_csv(in);
            }
        }
    }
    detail::write_battery_analysis(cfg, out_dir, data, detail::battery_origin_cell(cfg), result);
}

}  // namespace evodrift
