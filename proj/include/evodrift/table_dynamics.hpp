#pragma once

// Evolutionary dynamics over a tabulated genotype space. Organisms are bare
// genotype ids; niche and evolvability come from the lookup table, so a
// generation touches no simulation at all.
//
//   drift  - fixed-size population seeded with copies of one random genotype;
//            every organism leaves one offspring, mutated with probability
//            offspring_mutation_prob by one uniform single-connection change.
//   niched - single random founder, two offspring per organism, random
//            admission order, capacity per behavioral niche cell.

#include <cstdint>
#include <vector>

#include "evodrift/ann.hpp"
#include "evodrift/common.hpp"
#include "evodrift/lookup_table.hpp"
#include "evodrift/rng.hpp"
#include "evodrift/run_record.hpp"

namespace evodrift {

struct RobotDriftParams {
    std::uint64_t pop_size = 2000000;
    std::uint64_t generations = 250;
    double offspring_mutation_prob = 0.5;
    std::uint64_t niche_capacity = 5;      // niched variant
    std::uint64_t offspring_per_parent = 2;  // niched variant

    void validate() const {
        if (offspring_mutation_prob < 0.0 || offspring_mutation_prob > 1.0)
            throw ConfigError("robot dynamics: offspring_mutation_prob outside [0,1]");
        if (pop_size < 1) throw ConfigError("robot dynamics: pop_size < 1");
        if (niche_capacity < 1) throw ConfigError("robot dynamics: niche_capacity < 1");
        if (offspring_per_parent < 1) throw ConfigError("robot dynamics: offspring_per_parent < 1");
    }
};

namespace detail {

inline RunRecordRow snapshot_table_population(std::span<const std::uint32_t> pop,
                                              std::span<const LookupRecord> records,
                                              std::uint64_t generation,
                                              std::uint64_t cumulative) {
    RunRecordRow row;
    row.checkpoint = generation;
    row.pop_size = pop.size();
    row.cumulative_individuals = cumulative;
    double total = 0.0;
    double cell_sum[kNicheCellCount] = {};
    std::uint32_t cell_count[kNicheCellCount] = {};
    for (std::uint32_t id : pop) {
        const LookupRecord& rec = records[id];
        total += rec.evolvability;
        cell_sum[rec.niche] += rec.evolvability;
        ++cell_count[rec.niche];
    }
    row.pop_mean_evolvability = pop.empty() ? 0.0 : total / double(pop.size());
    double niche_total = 0.0;
    std::uint32_t occupied = 0;
    for (std::uint32_t c = 0; c < kNicheCellCount; ++c) {
        if (cell_count[c] > 0) {
            niche_total += cell_sum[c] / cell_count[c];
            ++occupied;
        }
    }
    row.occupied_niches = occupied;
    row.niche_mean_evolvability = occupied == 0 ? 0.0 : niche_total / occupied;
    return row;
}

}  // namespace detail

struct TableRunResult {
    RunRecord record;
    std::vector<std::uint32_t> final_population;  // reduced genotype ids
};

inline TableRunResult run_robot_drift(const std::vector<LookupRecord>& records,
                                      const ReducedSpace& space, const RobotDriftParams& params,
                                      std::uint64_t seed, std::uint64_t record_interval = 1) {
    params.validate();
    if (records.size() != space.size()) throw ConfigError("robot drift: table/space mismatch");
    if (record_interval < 1) throw ConfigError("robot drift: record_interval < 1");
    Rng rng(seed);
    const std::uint32_t n_neighbors = space.neighbor_count();
    TableRunResult out;
    auto& pop = out.final_population;
    pop.assign(params.pop_size, static_cast<std::uint32_t>(rng.uniform_int(space.size())));
    std::uint64_t cumulative = params.pop_size;
    out.record.rows.push_back(detail::snapshot_table_population(pop, records, 0, cumulative));
    for (std::uint64_t gen = 1; gen <= params.generations; ++gen) {
        if (n_neighbors > 0) {
            for (auto& id : pop) {
                if (rng.uniform() < params.offspring_mutation_prob)
                    id = static_cast<std::uint32_t>(space.neighbor(id, static_cast<std::uint32_t>(
                                                                           rng.uniform_int(n_neighbors))));
            }
        }
        cumulative += params.pop_size;
        if (gen % record_interval == 0 || gen == params.generations)
            out.record.rows.push_back(
                detail::snapshot_table_population(pop, records, gen, cumulative));
    }
    return out;
}

inline TableRunResult run_robot_niched(const std::vector<LookupRecord>& records,
                                       const ReducedSpace& space, const RobotDriftParams& params,
                                       std::uint64_t seed, std::uint64_t record_interval = 1) {
    params.validate();
    if (records.size() != space.size()) throw ConfigError("robot niched: table/space mismatch");
    if (record_interval < 1) throw ConfigError("robot niched: record_interval < 1");
    Rng rng(seed);
    const std::uint32_t n_neighbors = space.neighbor_count();
    TableRunResult out;
    auto& pop = out.final_population;
    pop.assign(1, static_cast<std::uint32_t>(rng.uniform_int(space.size())));
    std::uint64_t cumulative = 1;
    out.record.rows.push_back(detail::snapshot_table_population(pop, records, 0, cumulative));
    std::vector<std::uint32_t> offspring;
    for (std::uint64_t gen = 1; gen <= params.generations; ++gen) {
        offspring.clear();
        offspring.reserve(pop.size() * params.offspring_per_parent);
        for (std::uint32_t id : pop) {
            for (std::uint64_t k = 0; k < params.offspring_per_parent; ++k) {
                std::uint32_t child = id;
                if (n_neighbors > 0 && rng.uniform() < params.offspring_mutation_prob)
                    child = static_cast<std::uint32_t>(space.neighbor(
                        child, static_cast<std::uint32_t>(rng.uniform_int(n_neighbors))));
                offspring.push_back(child);
            }
        }
        cumulative += offspring.size();
        rng.shuffle(offspring);
        std::uint32_t cell_count[kNicheCellCount] = {};
        pop.clear();
        for (std::uint32_t child : offspring) {
            std::uint32_t& count = cell_count[records[child].niche];
            if (count < params.niche_capacity) {
                ++count;
                pop.push_back(child);
            }
        }
        if (gen % record_interval == 0 || gen == params.generations)
            out.record.rows.push_back(
                detail::snapshot_table_population(pop, records, gen, cumulative));
    }
    return out;
}

}  // namespace evodrift
