#pragma once

// Built-in oracle suite behind the `verify` CLI verb: fast, self-contained
// consistency checks of the core machinery against independent computations.

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "evodrift/abstract.hpp"
#include "evodrift/ann.hpp"
#include "evodrift/lookup_table.hpp"
#include "evodrift/maze.hpp"
#include "evodrift/rng.hpp"
#include "evodrift/stats.hpp"

namespace evodrift {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Small enclosed arena used by the self-contained checks.
inline constexpr const char* kSelfCheckMaze =
    "# self-check arena\n"
    "start 30 30 0.7853981633974483\n"
    "wall 0 0 120 0\n"
    "wall 120 0 120 120\n"
    "wall 120 120 0 120\n"
    "wall 0 120 0 0\n"
    "wall 60 0 60 70\n"
    "wall 0 80 40 80\n"
    "wall 80 120 80 60\n";

namespace selfcheck {

inline CheckResult neighborhood_cardinality() {
    CheckResult res{"neighborhood-cardinality", true, ""};
    Rng rng(0x5eedu);
    for (int trial = 0; trial < 10000 && res.pass; ++trial) {
        FixedAnnGenome g = decode(static_cast<GenotypeId>(rng.uniform_int(kFullSpaceSize)));
        const auto neighbors = single_mutation_neighbors(g);
        if (neighbors.size() != 36) {
            res.pass = false;
            res.detail = "expected 36 neighbors, got " + std::to_string(neighbors.size());
            break;
        }
        std::set<GenotypeId> distinct;
        for (const auto& n : neighbors) {
            int diff = 0;
            for (int i = 0; i < kGeneCount; ++i) diff += n.trits[i] != g.trits[i] ? 1 : 0;
            if (diff != 1) {
                res.pass = false;
                res.detail = "neighbor differs in " + std::to_string(diff) + " genes";
                break;
            }
            distinct.insert(encode(n));
        }
        if (res.pass && distinct.size() != 36) {
            res.pass = false;
            res.detail = "neighbors not distinct";
        }
    }
    if (res.pass) res.detail = "36 distinct one-gene neighbors for 10^4 random genomes";
    return res;
}

inline CheckResult encode_decode_roundtrip() {
    CheckResult res{"encode-decode-roundtrip", true, ""};
    Rng rng(0xc0deu);
    for (int trial = 0; trial < 100000; ++trial) {
        const GenotypeId id = static_cast<GenotypeId>(rng.uniform_int(kFullSpaceSize));
        if (encode(decode(id)) != id) {
            res.pass = false;
            res.detail = "roundtrip failed for id " + std::to_string(id);
            return res;
        }
    }
    bool rejected = false;
    try {
        decode(kFullSpaceSize);
    } catch (const ConfigError&) {
        rejected = true;
    }
    if (!rejected) {
        res.pass = false;
        res.detail = "decode accepted an out-of-range id";
        return res;
    }
    res.detail = "10^5 random ids round-trip; out-of-range id rejected";
    return res;
}

inline CheckResult pearson_direct_formula() {
    CheckResult res{"pearson-direct-formula", true, ""};
    const std::vector<double> x = {1.0, 2.0, 3.5, 4.0, 5.25, 6.0, 7.75, 8.0, 9.5, 10.0};
    const std::vector<double> y = {2.1, 2.9, 4.6, 4.4, 6.35, 6.2, 8.55, 8.1, 10.7, 10.4};
    const CorrelationResult got = pearson(x, y);
    // Direct covariance/variance evaluation, independent of pearson().
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    const double r_direct = cov / std::sqrt(vx * vy);
    const double slope_direct = cov / vx;
    const double intercept_direct = sy / n - slope_direct * (sx / n);
    if (!got.defined || std::fabs(got.r - r_direct) > 1e-12 ||
        std::fabs(got.slope - slope_direct) > 1e-12 ||
        std::fabs(got.intercept - intercept_direct) > 1e-12) {
        res.pass = false;
        res.detail = "pearson deviates from the direct formula by more than 1e-12";
        return res;
    }
    res.detail = "r/slope/intercept match the direct formula to 1e-12";
    return res;
}

inline CheckResult mutate_binomial() {
    CheckResult res{"mutate-move-frequency", true, ""};
    AbstractParams params;
    params.evo_mut_prob = 0.0;  // isolate the niche move event
    const AbstractOrganism parent{0, 0, 0.05};
    Rng rng(0xabcdu);
    const int n = 1000000;
    int moved = 0;
    for (int i = 0; i < n; ++i) {
        const AbstractOrganism child = mutate_abstract(parent, params, rng);
        if (child.x != parent.x || child.y != parent.y) ++moved;
    }
    const double fraction = double(moved) / n;
    // Central 99.99% binomial interval around p = 0.05 (normal approximation,
    // z = Phi^-1(0.99995)): 0.05 +/- 0.000848 at n = 10^6.
    const double z = 3.8905918864131;
    const double halfwidth = z * std::sqrt(0.05 * 0.95 / n);
    if (fraction < 0.05 - halfwidth || fraction > 0.05 + halfwidth) {
        res.pass = false;
        res.detail = "move fraction " + format_double(fraction) + " outside 0.05 +/- " +
                     format_double(halfwidth);
        return res;
    }
    res.detail = "move fraction " + format_double(fraction) + " within 0.05 +/- " +
                 format_double(halfwidth);
    return res;
}

// Mask with genes 0 (in0->h0) and 10 (h0->o0) free: a 3^2 space whose
// genotypes actually behave differently.
inline GeneMask tiny_space_mask() {
    GeneMask m;  // all pinned
    m.free[0] = true;
    m.free[10] = true;
    return m;
}

inline CheckResult restricted_tabulation_brute_force() {
    CheckResult res{"restricted-tabulation-vs-brute-force", true, ""};
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    const ReducedSpace space(tiny_space_mask());
    const std::vector<LookupRecord> table = tabulate(maze, rparams, space, 0, space.size(), 1);
    for (std::uint64_t id = 0; id < space.size(); ++id) {
        // Independent path: direct simulation of the genotype and each of its
        // in-space single-mutation neighbors.
        const FixedAnnGenome g = space.genome(id);
        const std::uint16_t niche = simulate_niche(maze, rparams, g);
        std::set<std::uint16_t> distinct;
        for (const auto& n : single_mutation_neighbors(g)) {
            bool in_space = true;
            for (int i = 0; i < kGeneCount; ++i) {
                if (!space.mask().free[i] && n.trits[i] != 0) {
                    in_space = false;
                    break;
                }
            }
            if (in_space) distinct.insert(simulate_niche(maze, rparams, n));
        }
        if (table[id].niche != niche || table[id].evolvability != distinct.size() ||
            !table[id].valid()) {
            res.pass = false;
            res.detail = "record mismatch at reduced id " + std::to_string(id);
            return res;
        }
    }
    res.detail = "all 9 records match direct re-simulation";
    return res;
}

inline CheckResult table_schedule_independence() {
    CheckResult res{"table-build-schedule-independence", true, ""};
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    GeneMask mask = tiny_space_mask();  // widen to 3^4 for a real partition
    mask.free[4] = true;
    mask.free[13] = true;
    const ReducedSpace space(mask);
    const auto one = tabulate(maze, rparams, space, 0, space.size(), 1);
    const auto two = tabulate(maze, rparams, space, 0, space.size(), 2);
    if (one != two) {
        res.pass = false;
        res.detail = "records differ between 1-worker and 2-worker builds";
        return res;
    }
    // Merged shard bytes: one shard vs two half-range shards concatenated.
    const std::string single = encode_shard(0, one);
    const std::size_t half = one.size() / 2;
    std::string merged;
    merged += encode_shard(0, std::span<const LookupRecord>(one.data(), half));
    merged += encode_shard(half, std::span<const LookupRecord>(one.data() + half,
                                                               one.size() - half));
    auto payload = [](const std::string& s) { return s.substr(kShardHeaderBytes); };
    if (payload(single) !=
        payload(merged.substr(0, kShardHeaderBytes + half * 4)) +
            payload(merged.substr(kShardHeaderBytes + half * 4))) {
        res.pass = false;
        res.detail = "merged shard payloads differ";
        return res;
    }
    res.detail = "81-genotype space tabulates identically on 1 and 2 workers";
    return res;
}

}  // namespace selfcheck

inline std::vector<CheckResult> run_self_checks() {
    return {selfcheck::neighborhood_cardinality(), selfcheck::encode_decode_roundtrip(),
            selfcheck::pearson_direct_formula(),   selfcheck::mutate_binomial(),
            selfcheck::restricted_tabulation_brute_force(),
            selfcheck::table_schedule_independence()};
}

}  // namespace evodrift
