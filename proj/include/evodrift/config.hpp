#pragma once

// Experiment configuration: one JSON document selects the model, the battery
// size and seed, and a model-specific parameter block. Every default in the
// parameter structs can be overridden here. Unknown keys are rejected so a
// typo cannot silently fall back to a default.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>

#include <json.hpp>

#include "evodrift/abstract.hpp"
#include "evodrift/analysis.hpp"
#include "evodrift/common.hpp"
#include "evodrift/maze.hpp"
#include "evodrift/neat.hpp"
#include "evodrift/table_dynamics.hpp"

namespace evodrift {

enum class ModelKind {
    abstract_drift,
    abstract_niched,
    robot_drift,
    robot_niched,
    neat_niched,
    neat_random_control,
};

inline const char* model_name(ModelKind m) {
    switch (m) {
        case ModelKind::abstract_drift: return "abstract-drift";
        case ModelKind::abstract_niched: return "abstract-niched";
        case ModelKind::robot_drift: return "robot-drift";
        case ModelKind::robot_niched: return "robot-niched";
        case ModelKind::neat_niched: return "neat-niched";
        case ModelKind::neat_random_control: return "neat-random-control";
    }
    return "?";
}

inline ModelKind model_from_name(const std::string& name) {
    for (ModelKind m : {ModelKind::abstract_drift, ModelKind::abstract_niched,
                        ModelKind::robot_drift, ModelKind::robot_niched, ModelKind::neat_niched,
                        ModelKind::neat_random_control}) {
        if (name == model_name(m)) return m;
    }
    throw ConfigError("unknown model: " + name);
}

struct ExperimentConfig {
    ModelKind model = ModelKind::abstract_drift;
    std::uint64_t runs = 1;
    std::uint64_t base_seed = 1;
    std::string out_dir;
    unsigned threads = 0;  // 0: EVODRIFT_THREADS or hardware
    std::uint64_t record_interval = 0;  // 0: model default (abstract 10, robot 1, neat 500)
    bool save_final_populations = true;
    DistanceMetric distance_metric = DistanceMetric::euclidean;

    AbstractParams abstract;
    RobotParams robot;  // also used by `tabulate`
    RobotDriftParams robot_drift;
    NeatParams neat;

    std::string maze_path;        // resolved against the config file directory
    std::string table_manifest;   // robot models: prebuilt lookup table
    std::string mask;             // gene-pinning mask for `tabulate` / table checks

    bool is_abstract() const {
        return model == ModelKind::abstract_drift || model == ModelKind::abstract_niched;
    }
    bool is_table_model() const {
        return model == ModelKind::robot_drift || model == ModelKind::robot_niched;
    }
    bool is_neat() const {
        return model == ModelKind::neat_niched || model == ModelKind::neat_random_control;
    }

    std::uint64_t effective_record_interval() const {
        if (record_interval > 0) return record_interval;
        if (is_abstract()) return 10;
        if (is_table_model()) return 1;
        return 500;
    }
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                       const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    const nlohmann::json& v = j.at(key);
    if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && v.get<long long>() < 0)
            throw ConfigError(std::string("config: '") + key + "' must be non-negative");
    }
    out = v.get<T>();
}

inline void parse_abstract_block(const nlohmann::json& j, AbstractParams& p) {
    check_keys(j,
               {"init_evolvability", "evo_mut_prob", "evo_mut_halfwidth", "pop_size",
                "generations", "niche_capacity", "offspring_per_parent", "reproduction_mode"},
               "abstract");
    maybe(j, "init_evolvability", p.init_evolvability);
    maybe(j, "evo_mut_prob", p.evo_mut_prob);
    maybe(j, "evo_mut_halfwidth", p.evo_mut_halfwidth);
    maybe(j, "pop_size", p.pop_size);
    maybe(j, "generations", p.generations);
    maybe(j, "niche_capacity", p.niche_capacity);
    maybe(j, "offspring_per_parent", p.offspring_per_parent);
    if (j.contains("reproduction_mode")) {
        const std::string mode = j.at("reproduction_mode").get<std::string>();
        if (mode == "independent-lineages") {
            p.reproduction_mode = ReproductionMode::independent_lineages;
        } else if (mode == "resampling") {
            p.reproduction_mode = ReproductionMode::resampling;
        } else {
            throw ConfigError("config: unknown reproduction_mode: " + mode);
        }
    }
}

inline void parse_robot_block(const nlohmann::json& j, RobotParams& p) {
    check_keys(j,
               {"sensors", "sensor_angles", "sensor_range", "max_speed", "max_turn",
                "robot_radius", "timesteps"},
               "robot");
    if (j.contains("sensors")) {
        const int n = j.at("sensors").get<int>();
        if (n == 3) {
            p = RobotParams::three_sensor();
        } else if (n == 6) {
            p = RobotParams::six_sensor();
        } else {
            throw ConfigError("config: robot.sensors must be 3 or 6 (or set sensor_angles)");
        }
    }
    maybe(j, "sensor_angles", p.sensor_angles);
    maybe(j, "sensor_range", p.sensor_range);
    maybe(j, "max_speed", p.max_speed);
    maybe(j, "max_turn", p.max_turn);
    maybe(j, "robot_radius", p.robot_radius);
    maybe(j, "timesteps", p.timesteps);
}

inline void parse_robot_drift_block(const nlohmann::json& j, RobotDriftParams& p) {
    check_keys(j,
               {"pop_size", "generations", "offspring_mutation_prob", "niche_capacity",
                "offspring_per_parent"},
               "robot_drift");
    maybe(j, "pop_size", p.pop_size);
    maybe(j, "generations", p.generations);
    maybe(j, "offspring_mutation_prob", p.offspring_mutation_prob);
    maybe(j, "niche_capacity", p.niche_capacity);
    maybe(j, "offspring_per_parent", p.offspring_per_parent);
}

inline void parse_neat_block(const nlohmann::json& j, NeatParams& p) {
    check_keys(j,
               {"weight_perturb_prob", "add_connection_prob", "add_node_prob",
                "weight_perturb_halfwidth", "weight_bound", "evaluation_budget",
                "niche_capacity", "evolvability_samples", "checkpoint_interval",
                "checkpoint_sample_cap"},
               "neat");
    maybe(j, "weight_perturb_prob", p.weight_perturb_prob);
    maybe(j, "add_connection_prob", p.add_connection_prob);
    maybe(j, "add_node_prob", p.add_node_prob);
    maybe(j, "weight_perturb_halfwidth", p.weight_perturb_halfwidth);
    maybe(j, "weight_bound", p.weight_bound);
    maybe(j, "evaluation_budget", p.evaluation_budget);
    maybe(j, "niche_capacity", p.niche_capacity);
    maybe(j, "evolvability_samples", p.evolvability_samples);
    maybe(j, "checkpoint_interval", p.checkpoint_interval);
    maybe(j, "checkpoint_sample_cap", p.checkpoint_sample_cap);
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j,
                                     const std::filesystem::path& config_dir) {
    detail::check_keys(j,
                       {"model", "runs", "base_seed", "out", "threads", "record_interval",
                        "save_final_populations", "distance_metric", "abstract", "robot",
                        "robot_drift", "neat", "maze", "table_manifest", "mask"},
                       "top level");
    ExperimentConfig cfg;
    if (!j.contains("model")) throw ConfigError("config: missing 'model'");
    cfg.model = model_from_name(j.at("model").get<std::string>());
    if (cfg.model == ModelKind::abstract_niched) cfg.abstract = AbstractParams::niched_defaults();
    if (cfg.is_neat()) {
        cfg.robot = RobotParams::six_sensor();
        cfg.neat.control_mode = cfg.model == ModelKind::neat_random_control ? NicheMode::random
                                                                            : NicheMode::behavior;
    }
    detail::maybe(j, "runs", cfg.runs);
    detail::maybe(j, "base_seed", cfg.base_seed);
    detail::maybe(j, "out", cfg.out_dir);
    detail::maybe(j, "threads", cfg.threads);
    detail::maybe(j, "record_interval", cfg.record_interval);
    detail::maybe(j, "save_final_populations", cfg.save_final_populations);
    if (j.contains("distance_metric")) {
        const std::string metric = j.at("distance_metric").get<std::string>();
        if (metric == "euclidean") {
            cfg.distance_metric = DistanceMetric::euclidean;
        } else if (metric == "manhattan") {
            cfg.distance_metric = DistanceMetric::manhattan;
        } else {
            throw ConfigError("config: unknown distance_metric: " + metric);
        }
    }
    if (j.contains("abstract")) detail::parse_abstract_block(j.at("abstract"), cfg.abstract);
    if (j.contains("robot")) detail::parse_robot_block(j.at("robot"), cfg.robot);
    if (j.contains("robot_drift"))
        detail::parse_robot_drift_block(j.at("robot_drift"), cfg.robot_drift);
    if (j.contains("neat")) detail::parse_neat_block(j.at("neat"), cfg.neat);

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        if (path.is_absolute()) return path.string();
        return (config_dir / path).string();
    };
    if (j.contains("maze")) cfg.maze_path = resolve(j.at("maze").get<std::string>());
    if (j.contains("table_manifest"))
        cfg.table_manifest = resolve(j.at("table_manifest").get<std::string>());
    detail::maybe(j, "mask", cfg.mask);

    if (cfg.runs < 1) throw ConfigError("config: runs < 1");
    cfg.abstract.validate();
    cfg.robot.validate();
    cfg.robot_drift.validate();
    cfg.neat.validate();
    if (!cfg.mask.empty()) GeneMask::parse(cfg.mask);
    if (cfg.is_neat() && cfg.robot.sensor_angles.size() != kNeatSensorCount)
        throw ConfigError("config: the practical model needs 6 sensors");
    if (cfg.is_table_model() && cfg.table_manifest.empty())
        throw ConfigError("config: robot models need table_manifest");
    if (cfg.is_neat() && cfg.maze_path.empty())
        throw ConfigError("config: the practical model needs a maze file");
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(j, std::filesystem::absolute(path).parent_path());
}

// Canonical re-serialization of the effective configuration; its digest goes
// into run manifests so outputs can be traced to the exact parameter set.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["model"] = model_name(cfg.model);
    j["runs"] = cfg.runs;
    j["base_seed"] = cfg.base_seed;
    j["record_interval"] = cfg.effective_record_interval();
    j["save_final_populations"] = cfg.save_final_populations;
    j["distance_metric"] =
        cfg.distance_metric == DistanceMetric::euclidean ? "euclidean" : "manhattan";
    j["abstract"] = {
        {"init_evolvability", cfg.abstract.init_evolvability},
        {"evo_mut_prob", cfg.abstract.evo_mut_prob},
        {"evo_mut_halfwidth", cfg.abstract.evo_mut_halfwidth},
        {"pop_size", cfg.abstract.pop_size},
        {"generations", cfg.abstract.generations},
        {"niche_capacity", cfg.abstract.niche_capacity},
        {"offspring_per_parent", cfg.abstract.offspring_per_parent},
        {"reproduction_mode",
         cfg.abstract.reproduction_mode == ReproductionMode::independent_lineages
             ? "independent-lineages"
             : "resampling"},
    };
    j["robot"] = robot_params_to_json(cfg.robot);
    j["robot_drift"] = {
        {"pop_size", cfg.robot_drift.pop_size},
        {"generations", cfg.robot_drift.generations},
        {"offspring_mutation_prob", cfg.robot_drift.offspring_mutation_prob},
        {"niche_capacity", cfg.robot_drift.niche_capacity},
        {"offspring_per_parent", cfg.robot_drift.offspring_per_parent},
    };
    j["neat"] = {
        {"weight_perturb_prob", cfg.neat.weight_perturb_prob},
        {"add_connection_prob", cfg.neat.add_connection_prob},
        {"add_node_prob", cfg.neat.add_node_prob},
        {"weight_perturb_halfwidth", cfg.neat.weight_perturb_halfwidth},
        {"weight_bound", cfg.neat.weight_bound},
        {"evaluation_budget", cfg.neat.evaluation_budget},
        {"niche_capacity", cfg.neat.niche_capacity},
        {"evolvability_samples", cfg.neat.evolvability_samples},
        {"checkpoint_interval", cfg.neat.checkpoint_interval},
        {"checkpoint_sample_cap", cfg.neat.checkpoint_sample_cap},
        {"control_mode", cfg.neat.control_mode == NicheMode::behavior ? "behavior" : "random"},
    };
    j["maze"] = cfg.maze_path;
    j["table_manifest"] = cfg.table_manifest;
    j["mask"] = cfg.mask;
    return j;
}

inline std::string config_digest(const ExperimentConfig& cfg) {
    return digest_hex(config_to_json(cfg).dump());
}

}  // namespace evodrift
