#pragma once

// Variable-topology neuroevolution without fitness: genomes list nodes and
// weighted connections (weights clamped to [-3, 3]), mutation is asexual and
// applies, in fixed order within one call, per-connection weight perturbation,
// then add-connection, then add-node (split an enabled connection; the in-half
// gets weight 1.0, the out-half inherits the old weight). Innovation numbers
// come from a counter owned by the run and strictly increase.
//
// run_neat_niched is a steady-state loop under a fixed evaluation budget: pick
// a uniformly random living individual, evaluate its mutant offspring, assign
// a niche (the behavior cell, or a uniform random cell in the control mode),
// and admit it unless the niche is full. Survival is otherwise random.
// Evolvability of a genome is estimated by counting distinct behavior cells
// among independent random mutants; those evaluations are metered separately
// from the run budget.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evodrift/ann.hpp"
#include "evodrift/common.hpp"
#include "evodrift/maze.hpp"
#include "evodrift/rng.hpp"
#include "evodrift/run_record.hpp"

namespace evodrift {

enum class NodeRole : std::uint8_t { input = 0, hidden = 1, output = 2, bias = 3 };

struct NeatNode {
    std::uint32_t id = 0;
    NodeRole role = NodeRole::hidden;

    friend bool operator==(const NeatNode&, const NeatNode&) = default;
};

struct NeatConnection {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    double weight = 0.0;
    bool enabled = true;
    std::uint32_t innovation = 0;

    friend bool operator==(const NeatConnection&, const NeatConnection&) = default;
};

struct NeatGenome {
    std::vector<NeatNode> nodes;
    std::vector<NeatConnection> connections;
    std::uint32_t next_node_id = 0;

    friend bool operator==(const NeatGenome&, const NeatGenome&) = default;
};

struct InnovationCounter {
    std::uint32_t next = 0;

    std::uint32_t take() { return next++; }
};

enum class NicheMode { behavior, random };

struct NeatParams {
    double weight_perturb_prob = 0.9;
    double add_connection_prob = 0.1;
    double add_node_prob = 0.02;
    double weight_perturb_halfwidth = 0.5;
    double weight_bound = 3.0;
    std::uint64_t evaluation_budget = 50000;
    std::uint64_t niche_capacity = 5;
    std::uint32_t evolvability_samples = 200;
    std::uint64_t checkpoint_interval = 500;
    std::uint32_t checkpoint_sample_cap = 30;
    NicheMode control_mode = NicheMode::behavior;

    void validate() const {
        for (double p : {weight_perturb_prob, add_connection_prob, add_node_prob}) {
            if (p < 0.0 || p > 1.0) throw ConfigError("neat: mutation probability outside [0,1]");
        }
        if (weight_perturb_halfwidth < 0.0) throw ConfigError("neat: weight_perturb_halfwidth < 0");
        if (weight_bound <= 0.0) throw ConfigError("neat: weight_bound <= 0");
        if (evaluation_budget < 1) throw ConfigError("neat: evaluation_budget < 1");
        if (niche_capacity < 1) throw ConfigError("neat: niche_capacity < 1");
        if (evolvability_samples < 1) throw ConfigError("neat: evolvability_samples < 1");
        if (checkpoint_interval < 1) throw ConfigError("neat: checkpoint_interval < 1");
        if (checkpoint_sample_cap < 1) throw ConfigError("neat: checkpoint_sample_cap < 1");
    }
};

inline constexpr std::uint32_t kNeatSensorCount = 6;
inline constexpr std::uint32_t kNeatOutputCount = 2;

// 6 sensor inputs and a bias, fully wired to the 2 motor outputs with uniform
// random weights. No hidden nodes.
inline NeatGenome initial_genome(Rng& rng, InnovationCounter& innovations,
                                 const NeatParams& params = NeatParams{}) {
    NeatGenome g;
    for (std::uint32_t i = 0; i < kNeatSensorCount; ++i)
        g.nodes.push_back(NeatNode{i, NodeRole::input});
    g.nodes.push_back(NeatNode{kNeatSensorCount, NodeRole::bias});
    for (std::uint32_t o = 0; o < kNeatOutputCount; ++o)
        g.nodes.push_back(NeatNode{kNeatSensorCount + 1 + o, NodeRole::output});
    g.next_node_id = kNeatSensorCount + 1 + kNeatOutputCount;
    for (std::uint32_t src = 0; src < kNeatSensorCount + 1; ++src) {
        for (std::uint32_t o = 0; o < kNeatOutputCount; ++o) {
            g.connections.push_back(NeatConnection{
                src, kNeatSensorCount + 1 + o,
                rng.uniform(-params.weight_bound, params.weight_bound), true,
                innovations.take()});
        }
    }
    return g;
}

inline NeatGenome mutate_neat(const NeatGenome& parent, const NeatParams& params,
                              InnovationCounter& innovations, Rng& rng) {
    NeatGenome child = parent;
    for (auto& conn : child.connections) {
        if (rng.uniform() < params.weight_perturb_prob) {
            conn.weight = clamp(conn.weight + rng.uniform(-params.weight_perturb_halfwidth,
                                                          params.weight_perturb_halfwidth),
                                -params.weight_bound, params.weight_bound);
        }
    }
    if (rng.uniform() < params.add_connection_prob) {
        std::unordered_set<std::uint64_t> existing;
        for (const auto& c : child.connections)
            existing.insert((static_cast<std::uint64_t>(c.src) << 32) | c.dst);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> open;
        for (const auto& src : child.nodes) {
            for (const auto& dst : child.nodes) {
                if (dst.role == NodeRole::input || dst.role == NodeRole::bias) continue;
                const std::uint64_t key = (static_cast<std::uint64_t>(src.id) << 32) | dst.id;
                if (!existing.count(key)) open.emplace_back(src.id, dst.id);
            }
        }
        if (!open.empty()) {  // saturated topology: silent no-op
            const auto [src, dst] = open[rng.index(open.size())];
            child.connections.push_back(NeatConnection{
                src, dst, rng.uniform(-params.weight_bound, params.weight_bound), true,
                innovations.take()});
        }
    }
    if (rng.uniform() < params.add_node_prob) {
        std::vector<std::size_t> enabled;
        for (std::size_t i = 0; i < child.connections.size(); ++i)
            if (child.connections[i].enabled) enabled.push_back(i);
        if (!enabled.empty()) {
            const std::size_t pick = enabled[rng.index(enabled.size())];
            // Copy before push_back: growing the vector invalidates references.
            const std::uint32_t split_src = child.connections[pick].src;
            const std::uint32_t split_dst = child.connections[pick].dst;
            const double split_weight = child.connections[pick].weight;
            child.connections[pick].enabled = false;
            const std::uint32_t node_id = child.next_node_id++;
            child.nodes.push_back(NeatNode{node_id, NodeRole::hidden});
            child.connections.push_back(
                NeatConnection{split_src, node_id, 1.0, true, innovations.take()});
            child.connections.push_back(
                NeatConnection{node_id, split_dst, split_weight, true, innovations.take()});
        }
    }
    return child;
}

// Synchronous-update network over a NeatGenome: every non-input neuron reads
// previous-step activations of its enabled incoming connections, sensor nodes
// carry the current sensor values and the bias node is pinned to 1.
class NeatController {
  public:
    explicit NeatController(const NeatGenome& genome) {
        index_of_.reserve(genome.nodes.size());
        for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
            const NeatNode& n = genome.nodes[i];
            if (index_of_.size() <= n.id) index_of_.resize(n.id + 1, kInvalid);
            if (index_of_[n.id] != kInvalid) throw EvalError("neat network: duplicate node id");
            index_of_[n.id] = static_cast<std::uint32_t>(i);
            switch (n.role) {
                case NodeRole::input: input_idx_.push_back(static_cast<std::uint32_t>(i)); break;
                case NodeRole::bias: bias_idx_.push_back(static_cast<std::uint32_t>(i)); break;
                case NodeRole::output: output_idx_.push_back(static_cast<std::uint32_t>(i)); break;
                case NodeRole::hidden: break;
            }
        }
        incoming_.resize(genome.nodes.size());
        for (const auto& c : genome.connections) {
            if (!c.enabled) continue;
            if (c.src >= index_of_.size() || index_of_[c.src] == kInvalid ||
                c.dst >= index_of_.size() || index_of_[c.dst] == kInvalid)
                throw EvalError("neat network: connection endpoint does not exist");
            incoming_[index_of_[c.dst]].push_back(
                {index_of_[c.src], c.weight});
        }
        for (std::size_t i = 0; i < genome.nodes.size(); ++i) {
            const NodeRole role = genome.nodes[i].role;
            if (role == NodeRole::hidden || role == NodeRole::output)
                active_.push_back(static_cast<std::uint32_t>(i));
        }
        if (output_idx_.size() != 2) throw EvalError("neat network: expected 2 outputs");
        act_.resize(genome.nodes.size(), 0.0);
        next_.resize(genome.nodes.size(), 0.0);
        reset();
    }

    void reset() {
        std::fill(act_.begin(), act_.end(), 0.0);
        for (std::uint32_t b : bias_idx_) act_[b] = 1.0;
    }

    std::array<double, 2> act(std::span<const double> sensors) {
        if (sensors.size() != input_idx_.size())
            throw EvalError("neat network: sensor count mismatch");
        for (std::size_t i = 0; i < input_idx_.size(); ++i) act_[input_idx_[i]] = sensors[i];
        next_ = act_;
        for (std::uint32_t n : active_) {
            double sum = 0.0;
            for (const auto& [src, w] : incoming_[n]) sum += w * act_[src];
            next_[n] = steepened_sigmoid(sum);
        }
        act_.swap(next_);
        return {act_[output_idx_[0]], act_[output_idx_[1]]};
    }

  private:
    static constexpr std::uint32_t kInvalid = 0xFFFFFFFFu;

    std::vector<std::uint32_t> index_of_;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> incoming_;
    std::vector<std::uint32_t> input_idx_, bias_idx_, output_idx_, active_;
    std::vector<double> act_, next_;
};

inline std::uint16_t neat_behavior_cell(const Maze& maze, const RobotParams& rparams,
                                        const NeatGenome& genome) {
    NeatController controller(genome);
    return evaluate_controller(maze, controller, rparams).niche.cell_id();
}

// Distinct behavior cells among evolvability_samples independent mutants.
// Throwaway innovation numbers; these evaluations never touch the run budget.
inline std::uint32_t estimate_evolvability(const NeatGenome& genome, const Maze& maze,
                                           const RobotParams& rparams, const NeatParams& params,
                                           Rng& rng) {
    InnovationCounter scratch;
    bool seen[kNicheCellCount] = {};
    std::uint32_t distinct = 0;
    for (std::uint32_t s = 0; s < params.evolvability_samples; ++s) {
        const NeatGenome mutant = mutate_neat(genome, params, scratch, rng);
        const std::uint16_t cell = neat_behavior_cell(maze, rparams, mutant);
        if (!seen[cell]) {
            seen[cell] = true;
            ++distinct;
        }
    }
    return distinct;
}

// ---------------------------------------------------------------------------
// Genome serialization (audit trail; round-trips weights exactly)
// ---------------------------------------------------------------------------

inline nlohmann::json neat_genome_to_json(const NeatGenome& g) {
    static constexpr const char* kRoleNames[4] = {"input", "hidden", "output", "bias"};
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes)
        nodes.push_back({{"id", n.id}, {"role", kRoleNames[static_cast<int>(n.role)]}});
    nlohmann::json conns = nlohmann::json::array();
    for (const auto& c : g.connections)
        conns.push_back({{"src", c.src},
                         {"dst", c.dst},
                         {"weight", format_double(c.weight)},
                         {"enabled", c.enabled},
                         {"innovation", c.innovation}});
    return nlohmann::json{
        {"nodes", nodes}, {"connections", conns}, {"next_node_id", g.next_node_id}};
}

inline NeatGenome neat_genome_from_json(const nlohmann::json& j) {
    NeatGenome g;
    for (const auto& n : j.at("nodes")) {
        const std::string role = n.at("role").get<std::string>();
        NodeRole r;
        if (role == "input") r = NodeRole::input;
        else if (role == "hidden") r = NodeRole::hidden;
        else if (role == "output") r = NodeRole::output;
        else if (role == "bias") r = NodeRole::bias;
        else throw ConfigError("genome json: unknown node role " + role);
        g.nodes.push_back(NeatNode{n.at("id").get<std::uint32_t>(), r});
    }
    for (const auto& c : j.at("connections")) {
        g.connections.push_back(NeatConnection{
            c.at("src").get<std::uint32_t>(), c.at("dst").get<std::uint32_t>(),
            std::stod(c.at("weight").get<std::string>()), c.at("enabled").get<bool>(),
            c.at("innovation").get<std::uint32_t>()});
    }
    g.next_node_id = j.at("next_node_id").get<std::uint32_t>();
    return g;
}

// ---------------------------------------------------------------------------
// Steady-state niched run
// ---------------------------------------------------------------------------

struct NeatCheckpointSample {
    std::uint64_t checkpoint = 0;
    std::uint16_t niche = 0;
    std::uint32_t evolvability = 0;
    const NeatGenome* genome = nullptr;
};

struct NeatRunResult {
    RunRecord record;
    std::uint64_t evaluations_used = 0;
    std::uint64_t estimation_evaluations = 0;
    std::uint64_t discarded_offspring = 0;
    std::vector<std::uint16_t> final_niches;  // admitted individuals, admission order
};

// sink, when set, receives every measured checkpoint individual (audit dump).
inline NeatRunResult run_neat_niched(
    const Maze& maze, const RobotParams& rparams, const NeatParams& params, std::uint64_t seed,
    const std::function<void(const NeatCheckpointSample&)>& sink = nullptr) {
    params.validate();
    rparams.validate();
    if (rparams.sensor_angles.size() != kNeatSensorCount)
        throw ConfigError("neat: robot params must have 6 sensors");

    Rng rng(seed);
    InnovationCounter innovations;
    NeatRunResult out;

    struct Individual {
        NeatGenome genome;
        std::uint16_t niche = 0;
    };
    std::vector<Individual> living;
    std::uint32_t cell_count[kNicheCellCount] = {};

    auto assign_niche = [&](std::uint16_t behavior_cell) -> std::uint16_t {
        if (params.control_mode == NicheMode::random)
            return static_cast<std::uint16_t>(rng.uniform_int(kNicheCellCount));
        return behavior_cell;
    };

    auto checkpoint_row = [&]() {
        RunRecordRow row;
        row.checkpoint = out.evaluations_used;
        row.pop_size = living.size();
        row.cumulative_individuals = out.evaluations_used;
        std::vector<std::size_t> order(living.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const std::size_t n_sample =
            std::min<std::size_t>(params.checkpoint_sample_cap, living.size());
        for (std::size_t i = 0; i < n_sample; ++i) {  // partial Fisher-Yates
            const std::size_t j = i + rng.index(order.size() - i);
            std::swap(order[i], order[j]);
        }
        double total = 0.0;
        double niche_sum[kNicheCellCount] = {};
        std::uint32_t niche_n[kNicheCellCount] = {};
        for (std::size_t i = 0; i < n_sample; ++i) {
            const Individual& ind = living[order[i]];
            const std::uint32_t est = estimate_evolvability(ind.genome, maze, rparams, params, rng);
            out.estimation_evaluations += params.evolvability_samples;
            total += est;
            niche_sum[ind.niche] += est;
            ++niche_n[ind.niche];
            if (sink)
                sink(NeatCheckpointSample{out.evaluations_used, ind.niche, est, &ind.genome});
        }
        row.pop_mean_evolvability = n_sample == 0 ? 0.0 : total / double(n_sample);
        double niche_total = 0.0;
        std::uint32_t sampled_niches = 0;
        for (std::uint32_t c = 0; c < kNicheCellCount; ++c) {
            if (niche_n[c] > 0) {
                niche_total += niche_sum[c] / niche_n[c];
                ++sampled_niches;
            }
        }
        row.niche_mean_evolvability = sampled_niches == 0 ? 0.0 : niche_total / sampled_niches;
        std::uint32_t occupied = 0;
        for (std::uint32_t c = 0; c < kNicheCellCount; ++c)
            if (cell_count[c] > 0) ++occupied;
        row.occupied_niches = occupied;
        out.record.rows.push_back(row);
    };

    // Founder.
    NeatGenome founder = initial_genome(rng, innovations, params);
    const std::uint16_t founder_cell = neat_behavior_cell(maze, rparams, founder);
    ++out.evaluations_used;
    const std::uint16_t founder_niche = assign_niche(founder_cell);
    ++cell_count[founder_niche];
    living.push_back(Individual{std::move(founder), founder_niche});
    if (out.evaluations_used % params.checkpoint_interval == 0 ||
        out.evaluations_used == params.evaluation_budget)
        checkpoint_row();

    while (out.evaluations_used < params.evaluation_budget) {
        const Individual& parent = living[rng.index(living.size())];
        NeatGenome child = mutate_neat(parent.genome, params, innovations, rng);
        const std::uint16_t behavior_cell = neat_behavior_cell(maze, rparams, child);
        ++out.evaluations_used;
        const std::uint16_t niche = assign_niche(behavior_cell);
        if (cell_count[niche] < params.niche_capacity) {
            ++cell_count[niche];
            living.push_back(Individual{std::move(child), niche});
        } else {
            ++out.discarded_offspring;
        }
        if (out.evaluations_used % params.checkpoint_interval == 0 ||
            out.evaluations_used == params.evaluation_budget)
            checkpoint_row();
    }
    out.final_niches.reserve(living.size());
    for (const auto& ind : living) out.final_niches.push_back(ind.niche);
    return out;
}

}  // namespace evodrift
