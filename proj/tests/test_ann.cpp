#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "evodrift/ann.hpp"
#include "evodrift/rng.hpp"

using namespace evodrift;

TEST_CASE("all-neutral genome encodes to id 0") {
    FixedAnnGenome g;
    CHECK(encode(g) == 0);
}

TEST_CASE("gene 0 excitatory, rest neutral, encodes to id 2") {
    FixedAnnGenome g;
    g.trits[0] = 2;  // excitatory trit
    CHECK(encode(g) == 2);
    // And the positional weights: gene i contributes trit * 3^i.
    FixedAnnGenome h;
    h.trits[3] = 1;  // inhibitory
    CHECK(encode(h) == 27);
}

TEST_CASE("decode(encode(g)) round-trips 10^5 random genomes") {
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
        FixedAnnGenome g;
        for (auto& t : g.trits) t = static_cast<std::uint8_t>(rng.uniform_int(3));
        const FixedAnnGenome back = decode(encode(g));
        REQUIRE(back.trits == g.trits);
    }
}

TEST_CASE("decode rejects ids at or beyond 3^18") {
    CHECK(kFullSpaceSize == 387420489u);
    CHECK_THROWS_AS(decode(kFullSpaceSize), ConfigError);
    CHECK_NOTHROW(decode(kFullSpaceSize - 1));
}

TEST_CASE("all-neutral genome activates to 0.5 on both motors for any input") {
    FixedAnnController c{FixedAnnGenome{}};
    Rng rng(2);
    for (int i = 0; i < 10; ++i) {
        const std::vector<double> in = {rng.uniform(), rng.uniform(), rng.uniform()};
        const auto motors = c.act(in);
        CHECK(motors[0] == doctest::Approx(0.5));
        CHECK(motors[1] == doctest::Approx(0.5));
    }
}

TEST_CASE("single excitatory input->hidden connection matches the closed form") {
    FixedAnnGenome g;
    g.trits[0] = 2;  // in0 -> h0, weight +1
    FixedAnnController c(g);
    c.reset();
    const std::vector<double> in = {1.0, 0.0, 0.0};
    c.act(in);
    // First step: h0 = s(1.0), everything else sees zero net input.
    CHECK(c.state[0] == doctest::Approx(1.0 / (1.0 + std::exp(-4.9))).epsilon(1e-15));
    CHECK(c.state[1] == doctest::Approx(0.5));
    CHECK(c.state[2] == doctest::Approx(0.5));
}

namespace {

// Mirror map over the declared layout: swap h0<->h1, o0<->o1, in0<->in2.
FixedAnnGenome mirror_genome(const FixedAnnGenome& g) {
    auto in_m = [](int i) { return i == 0 ? 2 : (i == 2 ? 0 : 1); };
    auto flip = [](int j) { return 1 - j; };
    FixedAnnGenome m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) m.trits[2 * in_m(i) + flip(j)] = g.trits[2 * i + j];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            m.trits[6 + 2 * flip(i) + flip(j)] = g.trits[6 + 2 * i + j];
            m.trits[10 + 2 * flip(i) + flip(j)] = g.trits[10 + 2 * i + j];
            m.trits[14 + 2 * flip(i) + flip(j)] = g.trits[14 + 2 * i + j];
        }
    return m;
}

}  // namespace

TEST_CASE("mirror-symmetric wiring with mirrored inputs gives mirrored outputs") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        FixedAnnGenome g;
        for (auto& t : g.trits) t = static_cast<std::uint8_t>(rng.uniform_int(3));
        FixedAnnController a(g), b(mirror_genome(g));
        for (int step = 0; step < 5; ++step) {
            const std::vector<double> in = {rng.uniform(), rng.uniform(), rng.uniform()};
            const std::vector<double> mirrored_in = {in[2], in[1], in[0]};
            const auto out_a = a.act(in);
            const auto out_b = b.act(mirrored_in);
            REQUIRE(out_a[0] == doctest::Approx(out_b[1]).epsilon(1e-12));
            REQUIRE(out_a[1] == doctest::Approx(out_b[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("every genome has exactly 36 distinct neighbors, each one gene away, symmetric") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        FixedAnnGenome g;
        for (auto& t : g.trits) t = static_cast<std::uint8_t>(rng.uniform_int(3));
        const auto neighbors = single_mutation_neighbors(g);
        REQUIRE(neighbors.size() == 36);
        std::set<GenotypeId> ids;
        for (const auto& n : neighbors) {
            int diff = 0;
            for (int i = 0; i < kGeneCount; ++i) diff += n.trits[i] != g.trits[i];
            REQUIRE(diff == 1);
            ids.insert(encode(n));
            // symmetry: g is a neighbor of each neighbor
            bool found = false;
            for (const auto& back : single_mutation_neighbors(n))
                if (back.trits == g.trits) found = true;
            REQUIRE(found);
        }
        REQUIRE(ids.size() == 36);
        REQUIRE(ids.count(encode(g)) == 0);
    }
}

TEST_CASE("gene mask parses, rejects junk, and induces the right subspace") {
    CHECK_THROWS_AS(GeneMask::parse("***"), ConfigError);
    CHECK_THROWS_AS(GeneMask::parse("..****************"), ConfigError);
    const GeneMask m = GeneMask::parse("**0000000000000000");
    CHECK(m.free_count() == 2);
    const ReducedSpace space(m);
    CHECK(space.size() == 9);
    CHECK(space.neighbor_count() == 4);
    CHECK(space.mask().to_string() == "**0000000000000000");

    // Reduced ids place the lowest free gene at the least significant trit.
    const FixedAnnGenome g = space.genome(5);  // 5 = 1*3 + 2: gene0=2, gene1=1
    CHECK(g.trits[0] == 2);
    CHECK(g.trits[1] == 1);
    CHECK(space.reduced_id(g) == 5);
}

TEST_CASE("full-space reduced ids coincide with genotype ids") {
    const ReducedSpace space = ReducedSpace::full();
    CHECK(space.size() == kFullSpaceSize);
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const GenotypeId id = static_cast<GenotypeId>(rng.uniform_int(kFullSpaceSize));
        CHECK(space.reduced_id(decode(id)) == id);
        CHECK(encode(space.genome(id)) == id);
    }
}

TEST_CASE("reduced-space neighbors match genome-level neighbor enumeration") {
    GeneMask m;
    m.free[2] = m.free[7] = m.free[11] = true;
    const ReducedSpace space(m);
    REQUIRE(space.size() == 27);
    Rng rng(6);
    std::vector<std::uint64_t> ids;
    for (std::uint64_t id = 0; id < space.size(); ++id) {
        space.neighbor_ids(id, ids);
        REQUIRE(ids.size() == 6);
        std::set<std::uint64_t> got(ids.begin(), ids.end());
        REQUIRE(got.size() == 6);
        // Every neighbor id decodes to a genome differing in exactly one free gene.
        const FixedAnnGenome g = space.genome(id);
        for (std::uint64_t nid : got) {
            const FixedAnnGenome n = space.genome(nid);
            int diff = 0;
            for (int k = 0; k < kGeneCount; ++k) diff += n.trits[k] != g.trits[k];
            REQUIRE(diff == 1);
        }
    }
    // Genome with a non-neutral pinned gene is rejected.
    FixedAnnGenome bad;
    bad.trits[0] = 1;
    CHECK_THROWS_AS(space.reduced_id(bad), ConfigError);
}
