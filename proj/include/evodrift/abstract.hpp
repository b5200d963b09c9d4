#pragma once

// The two abstract models. Organisms carry a niche point on an unbounded 2D
// integer lattice and a heritable evolvability: the per-generation probability
// that reproduction shifts the niche one unit in a uniformly chosen cardinal
// direction. Evolvability itself mutates rarely (prob evo_mut_prob) by a
// uniform draw in +/- evo_mut_halfwidth, clamped to [0,1].
//
//   drift   - fixed-size population, each organism replaced by one offspring
//             (or resampled Wright-Fisher style behind a flag).
//   niched  - generational replacement with offspring_per_parent offspring
//             per organism; offspring are admitted in uniformly random order
//             and discarded once their niche holds niche_capacity residents.

#include <cstdint>
#include <string>
#include <vector>

#include "evodrift/common.hpp"
#include "evodrift/niche_map.hpp"
#include "evodrift/rng.hpp"
#include "evodrift/run_record.hpp"

namespace evodrift {

struct AbstractOrganism {
    std::int32_t x = 0;
    std::int32_t y = 0;
    double evolvability = 0.0;
};

enum class ReproductionMode { independent_lineages, resampling };
enum class AbstractVariant { drift, niched };

struct AbstractParams {
    double init_evolvability = 0.05;
    double evo_mut_prob = 0.01;
    double evo_mut_halfwidth = 0.005;
    std::uint64_t pop_size = 40000;     // drift variant
    std::uint64_t generations = 3000;   // niched default is 1000, set by factory
    std::uint64_t niche_capacity = 5;   // niched variant
    std::uint64_t offspring_per_parent = 2;  // niched variant
    ReproductionMode reproduction_mode = ReproductionMode::independent_lineages;

    static AbstractParams drift_defaults() { return AbstractParams{}; }

    static AbstractParams niched_defaults() {
        AbstractParams p;
        p.generations = 1000;
        return p;
    }

    void validate() const {
        if (init_evolvability < 0.0 || init_evolvability > 1.0)
            throw ConfigError("abstract: init_evolvability outside [0,1]");
        if (evo_mut_prob < 0.0 || evo_mut_prob > 1.0)
            throw ConfigError("abstract: evo_mut_prob outside [0,1]");
        if (evo_mut_halfwidth < 0.0) throw ConfigError("abstract: evo_mut_halfwidth < 0");
        if (pop_size < 1) throw ConfigError("abstract: pop_size < 1");
        if (niche_capacity < 1) throw ConfigError("abstract: niche_capacity < 1");
        if (offspring_per_parent < 1) throw ConfigError("abstract: offspring_per_parent < 1");
    }
};

struct Population {
    std::vector<AbstractOrganism> organisms;
    std::uint64_t generation = 0;
};

// One reproduction. Niche mutation and evolvability mutation are independent
// events in the same call; the niche draw happens first (fixed order is part
// of the determinism contract).
inline AbstractOrganism mutate_abstract(const AbstractOrganism& parent,
                                        const AbstractParams& params, Rng& rng) {
    AbstractOrganism child = parent;
    if (rng.uniform() < parent.evolvability) {
        switch (rng.uniform_int(4)) {
            case 0: ++child.x; break;
            case 1: --child.x; break;
            case 2: ++child.y; break;
            default: --child.y; break;
        }
    }
    if (rng.uniform() < params.evo_mut_prob) {
        child.evolvability = clamp01(
            parent.evolvability + rng.uniform(-params.evo_mut_halfwidth, params.evo_mut_halfwidth));
    }
    return child;
}

inline void step_drift(Population& pop, const AbstractParams& params, Rng& rng) {
    if (params.reproduction_mode == ReproductionMode::independent_lineages) {
        for (auto& org : pop.organisms) org = mutate_abstract(org, params, rng);
    } else {
        const std::vector<AbstractOrganism> parents = pop.organisms;
        for (auto& org : pop.organisms)
            org = mutate_abstract(parents[rng.index(parents.size())], params, rng);
    }
    ++pop.generation;
}

struct NichedScratch {
    std::vector<AbstractOrganism> offspring;
    NicheMap<std::uint32_t> counts;
    std::uint64_t created_last_step = 0;
};

// Generational replacement with capacity-limited admission. Offspring order
// is a uniform shuffle, so within-niche survival is purely random.
inline void step_niched(Population& pop, const AbstractParams& params, Rng& rng,
                        NichedScratch& scratch) {
    auto& offspring = scratch.offspring;
    offspring.clear();
    offspring.reserve(pop.organisms.size() * params.offspring_per_parent);
    for (const auto& org : pop.organisms) {
        for (std::uint64_t k = 0; k < params.offspring_per_parent; ++k)
            offspring.push_back(mutate_abstract(org, params, rng));
    }
    scratch.created_last_step = offspring.size();
    rng.shuffle(offspring);
    scratch.counts.clear();
    pop.organisms.clear();
    for (const auto& child : offspring) {
        std::uint32_t& count = scratch.counts[pack_niche(child.x, child.y)];
        if (count < params.niche_capacity) {
            ++count;
            pop.organisms.push_back(child);
        }
    }
    ++pop.generation;
}

inline void step_niched(Population& pop, const AbstractParams& params, Rng& rng) {
    NichedScratch scratch;
    step_niched(pop, params, rng, scratch);
}

struct NicheStatAcc {
    double sum = 0.0;
    std::uint32_t count = 0;
};

// Fills one RunRecord row from a population snapshot.
inline RunRecordRow snapshot_abstract(const Population& pop, std::uint64_t cumulative,
                                      NicheMap<NicheStatAcc>& acc) {
    RunRecordRow row;
    row.checkpoint = pop.generation;
    row.pop_size = pop.organisms.size();
    row.cumulative_individuals = cumulative;
    acc.clear();
    double total = 0.0;
    for (const auto& org : pop.organisms) {
        total += org.evolvability;
        NicheStatAcc& a = acc[pack_niche(org.x, org.y)];
        a.sum += org.evolvability;
        ++a.count;
    }
    row.pop_mean_evolvability = pop.organisms.empty() ? 0.0 : total / double(pop.organisms.size());
    double niche_total = 0.0;
    acc.for_each([&](std::uint64_t, const NicheStatAcc& a) { niche_total += a.sum / a.count; });
    row.occupied_niches = acc.size();
    row.niche_mean_evolvability = acc.size() == 0 ? 0.0 : niche_total / double(acc.size());
    return row;
}

struct AbstractRunResult {
    RunRecord record;
    Population final_population;
};

// Full simulation of one variant: initializes per the model (drift: pop_size
// identical organisms at the origin; niched: a single founder), steps for
// params.generations generations, and records statistics every
// record_interval generations plus the initial and final states.
inline AbstractRunResult run_abstract(const AbstractParams& params, AbstractVariant variant,
                                      std::uint64_t seed, std::uint64_t record_interval = 10) {
    params.validate();
    if (record_interval < 1) throw ConfigError("abstract: record_interval < 1");
    Rng rng(seed);
    AbstractRunResult out;
    Population& pop = out.final_population;
    const AbstractOrganism founder{0, 0, params.init_evolvability};
    std::uint64_t cumulative = 0;
    if (variant == AbstractVariant::drift) {
        pop.organisms.assign(params.pop_size, founder);
        cumulative = params.pop_size;
    } else {
        pop.organisms.assign(1, founder);
        cumulative = 1;
    }

    NicheMap<NicheStatAcc> stat_acc;
    NichedScratch scratch;
    out.record.rows.push_back(snapshot_abstract(pop, cumulative, stat_acc));
    for (std::uint64_t gen = 1; gen <= params.generations; ++gen) {
        if (variant == AbstractVariant::drift) {
            step_drift(pop, params, rng);
            cumulative += params.pop_size;
        } else {
            step_niched(pop, params, rng, scratch);
            cumulative += scratch.created_last_step;
        }
        if (gen % record_interval == 0 || gen == params.generations)
            out.record.rows.push_back(snapshot_abstract(pop, cumulative, stat_acc));
    }
    return out;
}

}  // namespace evodrift
