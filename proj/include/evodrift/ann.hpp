#pragma once

// Enumerable fixed-topology recurrent ANN space. A genome is 18 ternary
// connection genes (neutral 0.0, inhibitory -1.0, excitatory +1.0) wired over
// 3 sensor inputs, 2 hidden neurons and 2 motor outputs:
//
//   genes  0..5   input  -> hidden   (source-major: in_i -> h_j at 2*i + j)
//   genes  6..9   hidden -> hidden   (including self)
//   genes 10..13  hidden -> output
//   genes 14..17  output -> output   (including self)
//
// Genotype ids are the base-3 positional encoding with gene 0 as the least
// significant trit and trit values {neutral: 0, inhibitory: 1, excitatory: 2}.
// Activation is one synchronous update per timestep: every hidden/output
// neuron sums its incoming connections, reading previous-step activations for
// neuron sources and current values for sensor inputs, then applies the
// steepened sigmoid 1/(1 + e^(-4.9 x)).
//
// A GeneMask can pin genes to neutral, inducing a 3^k subspace over the free
// genes; ReducedSpace handles the id arithmetic for such subspaces (the full
// space is the special case of an all-free mask).

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evodrift/common.hpp"
#include "evodrift/maze.hpp"

namespace evodrift {

inline constexpr int kAnnInputs = 3;
inline constexpr int kAnnHidden = 2;
inline constexpr int kAnnOutputs = 2;
inline constexpr int kGeneCount = 18;
inline constexpr double kSigmoidSlope = 4.9;

inline constexpr std::array<std::uint32_t, kGeneCount + 1> kPow3 = [] {
    std::array<std::uint32_t, kGeneCount + 1> p{};
    p[0] = 1;
    for (int i = 1; i <= kGeneCount; ++i) p[i] = p[i - 1] * 3;
    return p;
}();

inline constexpr std::uint32_t kFullSpaceSize = kPow3[kGeneCount];  // 3^18 = 387,420,489

enum class Gene : std::uint8_t { neutral = 0, inhibitory = 1, excitatory = 2 };

inline double gene_weight(std::uint8_t trit) {
    static constexpr double w[3] = {0.0, -1.0, 1.0};
    return w[trit];
}

struct FixedAnnGenome {
    std::array<std::uint8_t, kGeneCount> trits{};  // each in {0,1,2}
};

using GenotypeId = std::uint32_t;

inline GenotypeId encode(const FixedAnnGenome& g) {
    GenotypeId id = 0;
    for (int i = kGeneCount - 1; i >= 0; --i) id = id * 3 + g.trits[i];
    return id;
}

inline FixedAnnGenome decode(GenotypeId id) {
    if (id >= kFullSpaceSize) throw ConfigError("decode: genotype id out of range");
    FixedAnnGenome g;
    for (int i = 0; i < kGeneCount; ++i) {
        g.trits[i] = static_cast<std::uint8_t>(id % 3);
        id /= 3;
    }
    return g;
}

inline double steepened_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-kSigmoidSlope * x)); }

// Previous-step activations: h0, h1, o0, o1.
using AnnState = std::array<double, kAnnHidden + kAnnOutputs>;

// One synchronous network update. Returns the new state; motors are the two
// output activations (indices 2 and 3).
inline AnnState ann_activate(std::span<const double, kGeneCount> weights,
                             std::span<const double> inputs, const AnnState& prev) {
    AnnState next{};
    for (int j = 0; j < kAnnHidden; ++j) {
        double sum = 0.0;
        for (int i = 0; i < kAnnInputs; ++i) sum += weights[2 * i + j] * inputs[i];
        for (int i = 0; i < kAnnHidden; ++i) sum += weights[6 + 2 * i + j] * prev[i];
        next[j] = steepened_sigmoid(sum);
    }
    for (int j = 0; j < kAnnOutputs; ++j) {
        double sum = 0.0;
        for (int i = 0; i < kAnnHidden; ++i) sum += weights[10 + 2 * i + j] * prev[i];
        for (int i = 0; i < kAnnOutputs; ++i) sum += weights[14 + 2 * i + j] * prev[kAnnHidden + i];
        next[kAnnHidden + j] = steepened_sigmoid(sum);
    }
    return next;
}

struct FixedAnnController {
    std::array<double, kGeneCount> weights{};
    AnnState state{};

    explicit FixedAnnController(const FixedAnnGenome& g) {
        for (int i = 0; i < kGeneCount; ++i) weights[i] = gene_weight(g.trits[i]);
    }

    void reset() { state = AnnState{}; }

    std::array<double, 2> act(std::span<const double> sensors) {
        state = ann_activate(weights, sensors, state);
        return {state[kAnnHidden], state[kAnnHidden + 1]};
    }
};

// All genomes one connection mutation away: each gene swapped to both of its
// alternative values, in ascending trit order. 36 neighbors in the full space.
inline std::vector<FixedAnnGenome> single_mutation_neighbors(const FixedAnnGenome& g) {
    std::vector<FixedAnnGenome> out;
    out.reserve(kGeneCount * 2);
    for (int i = 0; i < kGeneCount; ++i) {
        for (std::uint8_t v = 0; v < 3; ++v) {
            if (v == g.trits[i]) continue;
            FixedAnnGenome n = g;
            n.trits[i] = v;
            out.push_back(n);
        }
    }
    return out;
}

// Gene-pinning mask: '*' marks a free gene, '0' a gene pinned to neutral.
struct GeneMask {
    std::array<bool, kGeneCount> free{};

    static GeneMask all_free() {
        GeneMask m;
        m.free.fill(true);
        return m;
    }

    // 18 chars, gene 0 first.
    static GeneMask parse(const std::string& text) {
        if (text.size() != kGeneCount)
            throw ConfigError("gene mask must have exactly 18 characters");
        GeneMask m;
        for (int i = 0; i < kGeneCount; ++i) {
            if (text[i] == '*') {
                m.free[i] = true;
            } else if (text[i] == '0') {
                m.free[i] = false;
            } else {
                throw ConfigError(std::string("gene mask: invalid character '") + text[i] +
                                  "' (use '*' or '0')");
            }
        }
        return m;
    }

    std::string to_string() const {
        std::string s(kGeneCount, '0');
        for (int i = 0; i < kGeneCount; ++i)
            if (free[i]) s[i] = '*';
        return s;
    }

    int free_count() const {
        int n = 0;
        for (bool f : free) n += f ? 1 : 0;
        return n;
    }
};

// Id arithmetic over the 3^k subspace induced by a mask. Reduced ids are the
// base-3 encoding over free genes in ascending gene order (lowest free gene =
// least significant trit); for an all-free mask they coincide with full ids.
class ReducedSpace {
  public:
    explicit ReducedSpace(const GeneMask& mask) : mask_(mask) {
        for (int i = 0; i < kGeneCount; ++i)
            if (mask.free[i]) free_genes_.push_back(i);
        pow3_.assign(free_genes_.size() + 1, 1);
        for (std::size_t i = 1; i < pow3_.size(); ++i) pow3_[i] = pow3_[i - 1] * 3;
        size_ = pow3_.back();
    }

    static ReducedSpace full() { return ReducedSpace(GeneMask::all_free()); }

    const GeneMask& mask() const { return mask_; }
    std::uint32_t free_count() const { return static_cast<std::uint32_t>(free_genes_.size()); }
    std::uint64_t size() const { return size_; }
    std::uint32_t neighbor_count() const { return 2 * free_count(); }

    FixedAnnGenome genome(std::uint64_t reduced_id) const {
        if (reduced_id >= size_) throw ConfigError("reduced id out of range");
        FixedAnnGenome g;
        for (int pos : free_genes_) {
            g.trits[pos] = static_cast<std::uint8_t>(reduced_id % 3);
            reduced_id /= 3;
        }
        return g;
    }

    std::uint64_t reduced_id(const FixedAnnGenome& g) const {
        std::uint64_t id = 0;
        for (int i = kGeneCount - 1; i >= 0; --i) {
            if (mask_.free[i]) {
                id = id * 3 + g.trits[i];
            } else if (g.trits[i] != 0) {
                throw ConfigError("genome has a non-neutral pinned gene");
            }
        }
        return id;
    }

    // which in [0, 2k): mutates free gene which/2 to its (which%2)-th
    // alternative value in ascending trit order.
    std::uint64_t neighbor(std::uint64_t reduced_id, std::uint32_t which) const {
        const std::uint32_t slot = which / 2;
        const std::uint64_t weight = pow3_[slot];
        const std::int64_t old_trit = static_cast<std::int64_t>((reduced_id / weight) % 3);
        std::int64_t alt = which % 2;  // 0 or 1 -> the two values != old_trit, ascending
        if (alt >= old_trit) ++alt;
        return static_cast<std::uint64_t>(
            static_cast<std::int64_t>(reduced_id) +
            (alt - old_trit) * static_cast<std::int64_t>(weight));
    }

    void neighbor_ids(std::uint64_t reduced_id, std::vector<std::uint64_t>& out) const {
        out.clear();
        const std::uint32_t n = neighbor_count();
        for (std::uint32_t w = 0; w < n; ++w) out.push_back(neighbor(reduced_id, w));
    }

  private:
    GeneMask mask_;
    std::vector<int> free_genes_;
    std::vector<std::uint64_t> pow3_;
    std::uint64_t size_ = 1;
};

}  // namespace evodrift
