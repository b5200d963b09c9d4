#pragma once

// Deterministic random streams.
//
// Every simulation draws from an explicitly seeded xoshiro256++ generator.
// Batteries of independent runs derive one stream per run index with
// seed_stream(), so runs can execute in parallel on any schedule and still
// reproduce bit-identical output.
//
// Derivation, fixed for this format version:
//   s      = base_seed + (run_index + 1) * 0x9E3779B97F4A7C15  (mod 2^64)
//   state  = four consecutive outputs of splitmix64 starting from s
// Doubles come from the top 53 bits ((x >> 11) * 2^-53), bounded integers
// from rejection sampling, so sequences do not depend on the standard
// library's distribution implementations.

#include <array>
#include <cstdint>

namespace evodrift {

struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

class Rng {
  public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : state_) w = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    bool chance(double p) { return uniform() < p; }

    // Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform_int(static_cast<std::uint64_t>(n)));
    }

    // Fisher-Yates shuffle.
    template <typename Seq>
    void shuffle(Seq& seq) {
        for (std::size_t i = seq.size(); i > 1; --i) {
            const std::size_t j = index(i);
            using std::swap;
            swap(seq[i - 1], seq[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

// Seed of the run_index-th stream derived from a battery's base seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t run_index) {
    return base_seed + (run_index + 1) * 0x9E3779B97F4A7C15ull;
}

// Independent, reproducible stream for one run of a battery.
inline Rng seed_stream(std::uint64_t base_seed, std::uint64_t run_index) {
    return Rng(derive_seed(base_seed, run_index));
}

}  // namespace evodrift
