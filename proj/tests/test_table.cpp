#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "evodrift/lookup_table.hpp"
#include "evodrift/rng.hpp"
#include "evodrift/selfcheck.hpp"
#include "evodrift/table_dynamics.hpp"

using namespace evodrift;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("evodrift_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

GeneMask two_gene_mask() {
    GeneMask m;
    m.free[0] = true;
    m.free[10] = true;
    return m;
}

}  // namespace

TEST_CASE("3^2 restricted tabulation matches exhaustive direct simulation") {
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    const ReducedSpace space(two_gene_mask());
    const auto table = tabulate(maze, rparams, space, 0, space.size());
    REQUIRE(table.size() == 9);
    for (std::uint64_t id = 0; id < space.size(); ++id) {
        const FixedAnnGenome g = space.genome(id);
        CHECK(table[id].niche == simulate_niche(maze, rparams, g));
        std::set<std::uint16_t> distinct;
        std::vector<std::uint64_t> nids;
        space.neighbor_ids(id, nids);
        for (std::uint64_t nid : nids)
            distinct.insert(simulate_niche(maze, rparams, space.genome(nid)));
        CHECK(table[id].evolvability == distinct.size());
        CHECK(table[id].valid());
    }
}

TEST_CASE("evolvability of the all-neutral genome agrees with a brute-force neighbor count") {
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    GeneMask m = two_gene_mask();
    m.free[4] = true;  // 3 free genes: id 0 is the all-neutral genome
    const ReducedSpace space(m);
    const auto table = tabulate(maze, rparams, space, 0, space.size());
    const FixedAnnGenome neutral;
    std::set<std::uint16_t> distinct;
    for (const auto& n : single_mutation_neighbors(neutral)) {
        bool in_space = true;
        for (int i = 0; i < kGeneCount; ++i)
            if (!m.free[i] && n.trits[i] != 0) in_space = false;
        if (in_space) distinct.insert(simulate_niche(maze, rparams, n));
    }
    CHECK(table[0].evolvability == distinct.size());
    CHECK(table[0].evolvability >= 1);
    CHECK(table[0].evolvability <= space.neighbor_count());
}

TEST_CASE("tabulate is independent of thread count and range splits merge identically") {
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    GeneMask m = two_gene_mask();
    m.free[4] = m.free[13] = true;
    const ReducedSpace space(m);
    const auto one = tabulate(maze, rparams, space, 0, space.size(), 1);
    const auto two = tabulate(maze, rparams, space, 0, space.size(), 2);
    CHECK(one == two);
    const auto niches = tabulate_niches(maze, rparams, space, 2);
    const auto lo = records_from_niches(space, niches, 0, 40);
    const auto hi = records_from_niches(space, niches, 40, space.size());
    std::vector<LookupRecord> merged = lo;
    merged.insert(merged.end(), hi.begin(), hi.end());
    CHECK(merged == one);
}

TEST_CASE("shard files round-trip and reject corruption") {
    TempDir dir;
    const std::vector<LookupRecord> records = {{7, 3, 1}, {399, 36, 1}, {0, 1, 1}};
    const auto path = dir.path / "shard.evlt";
    write_shard_file(path, 123, records);
    const ShardData back = read_shard_file(path);
    CHECK(back.start_id == 123);
    CHECK(back.records == records);

    // Header size check: 32 bytes + 4 per record.
    CHECK(std::filesystem::file_size(path) == 32 + 4 * records.size());

    // Truncated file rejected.
    std::ofstream overwrite(path, std::ios::binary | std::ios::trunc);
    overwrite << "EVLT";
    overwrite.close();
    CHECK_THROWS_AS(read_shard_file(path), ConfigError);

    // Invalid-record flag rejected.
    std::string bytes = encode_shard(0, records);
    bytes[32 + 3] = 0;  // clear the valid bit of record 0
    const auto bad_path = dir.path / "bad.evlt";
    std::ofstream bad(bad_path, std::ios::binary);
    bad.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    bad.close();
    CHECK_THROWS_AS(read_shard_file(bad_path), ConfigError);
}

TEST_CASE("heritability matches the direct Pearson formula on a constructed table") {
    // 2-free-gene space with hand-set evolvability values.
    const ReducedSpace space(two_gene_mask());
    std::vector<LookupRecord> table(9);
    const std::uint8_t values[9] = {1, 4, 2, 8, 5, 7, 3, 9, 6};
    for (int i = 0; i < 9; ++i) table[i] = LookupRecord{0, values[i], 1};
    Rng rng(7);
    const CorrelationResult got = heritability(table, space, 5000, rng);
    REQUIRE(got.defined);
    // Independent oracle: replay the identical sampling stream.
    Rng replay(7);
    std::vector<double> px, py;
    for (int i = 0; i < 5000; ++i) {
        const std::uint64_t p = replay.uniform_int(space.size());
        const std::uint64_t o = space.neighbor(
            p, static_cast<std::uint32_t>(replay.uniform_int(space.neighbor_count())));
        px.push_back(values[p]);
        py.push_back(values[o]);
    }
    const CorrelationResult expect = pearson(px, py);
    CHECK(got.r == doctest::Approx(expect.r).epsilon(1e-12));
    CHECK(got.n == expect.n);
}

TEST_CASE("heritability on a constant table is flagged undefined") {
    const ReducedSpace space(two_gene_mask());
    std::vector<LookupRecord> table(9, LookupRecord{0, 5, 1});
    Rng rng(8);
    CHECK_FALSE(heritability(table, space, 1000, rng).defined);
}

TEST_CASE("robot drift with zero mutation probability keeps all statistics constant") {
    const ReducedSpace space(two_gene_mask());
    std::vector<LookupRecord> table(9);
    for (int i = 0; i < 9; ++i)
        table[i] = LookupRecord{static_cast<std::uint16_t>(i * 3), static_cast<std::uint8_t>(i + 1), 1};
    RobotDriftParams params;
    params.pop_size = 100;
    params.generations = 20;
    params.offspring_mutation_prob = 0.0;
    const TableRunResult res = run_robot_drift(table, space, params, 99);
    REQUIRE(res.record.rows.size() == 21);
    for (const auto& row : res.record.rows) {
        CHECK(row.pop_mean_evolvability == res.record.rows[0].pop_mean_evolvability);
        CHECK(row.niche_mean_evolvability == res.record.rows[0].niche_mean_evolvability);
        CHECK(row.pop_size == 100);
    }
}

TEST_CASE("one-organism drift with certain mutation lands uniformly on the neighbors") {
    GeneMask m = two_gene_mask();
    m.free[4] = true;
    const ReducedSpace space(m);
    std::vector<LookupRecord> table(space.size(), LookupRecord{0, 1, 1});
    RobotDriftParams params;
    params.pop_size = 1;
    params.generations = 1;
    params.offspring_mutation_prob = 1.0;
    // Repeat over many seeds; Rng(seed) picks the founder first, so fix the
    // founder by filtering to seeds that draw id 0... simpler: count neighbor
    // hits of whatever founder each run picked.
    int counts[6] = {};
    const int trials = 6000;
    for (int t = 0; t < trials; ++t) {
        const TableRunResult res = run_robot_drift(table, space, params, 1000 + t);
        Rng replay(1000 + t);
        const std::uint64_t founder = replay.uniform_int(space.size());
        std::vector<std::uint64_t> nids;
        space.neighbor_ids(founder, nids);
        const std::uint32_t got = res.final_population[0];
        int which = -1;
        for (std::size_t i = 0; i < nids.size(); ++i)
            if (nids[i] == got) which = static_cast<int>(i);
        REQUIRE(which >= 0);  // offspring is one of the 6 neighbors
        ++counts[which];
    }
    // Chi-square uniformity over 6 cells, df=5; 0.999 quantile = 20.515.
    const double expected = trials / 6.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 20.515);
}

TEST_CASE("robot niched run respects capacity per cell and counts created individuals") {
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    GeneMask m = two_gene_mask();
    m.free[4] = m.free[13] = true;
    const ReducedSpace space(m);
    const auto table = tabulate(maze, rparams, space, 0, space.size());
    RobotDriftParams params;
    params.generations = 40;
    params.niche_capacity = 1;
    const TableRunResult res = run_robot_niched(table, space, params, 5);
    for (const auto& row : res.record.rows) {
        CHECK(row.pop_size <= 400);  // capacity 1 x at most 400 occupied cells
        CHECK(row.pop_size <= row.occupied_niches * params.niche_capacity);
    }
    // Cumulative individuals: founder + all offspring ever created.
    std::uint64_t expected_cum = 1;
    std::uint64_t pop = 1;
    Rng replay(5);
    (void)replay;
    // offspring created per generation is 2 * pop of the previous generation;
    // verify the bookkeeping via the recorded rows instead of replaying.
    for (std::size_t i = 1; i < res.record.rows.size(); ++i) {
        const auto& prev = res.record.rows[i - 1];
        const auto& cur = res.record.rows[i];
        expected_cum += 2 * prev.pop_size;
        CHECK(cur.cumulative_individuals == expected_cum);
        pop = cur.pop_size;
        (void)pop;
    }
}

TEST_CASE("table manifest round-trips and integrity checks refuse bad inputs") {
    TempDir dir;
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    const ReducedSpace space(two_gene_mask());
    const auto records = tabulate(maze, rparams, space, 0, space.size());

    {
        std::ofstream mz(dir.path / "maze.txt", std::ios::binary);
        mz << kSelfCheckMaze;
    }
    write_shard_file(dir.path / "shard_0000.evlt", 0, records);

    TableManifest manifest;
    manifest.mask = space.mask();
    manifest.robot = rparams;
    manifest.maze_file = "maze.txt";
    manifest.maze_digest = file_digest(dir.path / "maze.txt");
    manifest.shards.push_back(TableShardEntry{"shard_0000.evlt", 0, records.size()});
    write_table_manifest(dir.path / "manifest.json", manifest);

    const LookupTable loaded = load_table(dir.path / "manifest.json");
    CHECK(loaded.records == records);
    CHECK(loaded.mask.to_string() == space.mask().to_string());
    CHECK(loaded.robot.timesteps == rparams.timesteps);

    SUBCASE("maze digest mismatch is refused") {
        std::ofstream mz(dir.path / "maze.txt", std::ios::binary | std::ios::app);
        mz << "# tampered\n";
        mz.close();
        CHECK_THROWS_WITH_AS(load_table(dir.path / "manifest.json"),
                             doctest::Contains("digest mismatch"), ConfigError);
    }
    SUBCASE("shard gaps abort with a diagnostic") {
        TableManifest gap = manifest;
        gap.shards[0].start = 1;
        write_table_manifest(dir.path / "manifest.json", gap);
        CHECK_THROWS_WITH_AS(load_table(dir.path / "manifest.json"),
                             doctest::Contains("tile"), ConfigError);
    }
    SUBCASE("shard overlap/short coverage aborts") {
        TableManifest bad = manifest;
        bad.shards[0].count = records.size() - 1;
        write_table_manifest(dir.path / "manifest.json", bad);
        CHECK_THROWS_AS(load_table(dir.path / "manifest.json"), ConfigError);
    }
}

TEST_CASE("tabulated evolvability always lies within [1, 2 * free genes]") {
    const Maze maze = parse_maze(kSelfCheckMaze, RobotParams{}.robot_radius);
    const RobotParams rparams;
    GeneMask m = two_gene_mask();
    m.free[4] = m.free[13] = m.free[17] = true;  // 3^5 space
    const ReducedSpace space(m);
    const auto table = tabulate(maze, rparams, space, 0, space.size(), 2);
    for (const auto& rec : table) {
        REQUIRE(rec.evolvability >= 1);
        REQUIRE(rec.evolvability <= space.neighbor_count());
        REQUIRE(rec.niche < 400);
    }
}
