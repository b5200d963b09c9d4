#pragma once

// Exhaustive characterization of an (optionally reduced) fixed-ANN genotype
// space: every genotype's behavioral niche cell and its evolvability, the
// number of distinct niches reached by its single-connection mutants.
//
// Tabulation is two-phase so each genotype is simulated exactly once: first
// all niches, then evolvability counts read back from the stored niches.
// Output order matches id order regardless of how work was scheduled.
//
// Shard file format (little-endian):
//   bytes  0..3   magic "EVLT"
//   bytes  4..5   u16 format version (currently 1)
//   bytes  6..13  u64 start id
//   bytes 14..21  u64 record count
//   bytes 22..31  reserved (zero) padding to a 32-byte header
//   then count records of 4 bytes: u16 niche cell, u8 evolvability, u8 flags
//   (flag bit 0 = record valid).
// A JSON manifest lists the shards, the gene-pinning mask, the robot
// parameters and the maze content digest; loading verifies the digest and
// that the shards cover the id range exactly once.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evodrift/ann.hpp"
#include "evodrift/common.hpp"
#include "evodrift/maze.hpp"
#include "evodrift/parallel.hpp"
#include "evodrift/rng.hpp"
#include "evodrift/stats.hpp"

namespace evodrift {

inline constexpr std::uint16_t kShardFormatVersion = 1;
inline constexpr std::size_t kShardHeaderBytes = 32;
inline constexpr std::uint16_t kNicheUnset = 0xFFFF;

struct LookupRecord {
    std::uint16_t niche = 0;       // behavioral niche cell id in [0, 400)
    std::uint8_t evolvability = 0; // distinct niches among single-mutation neighbors
    std::uint8_t flags = 0;        // bit 0: valid

    bool valid() const { return (flags & 1u) != 0; }

    friend bool operator==(const LookupRecord&, const LookupRecord&) = default;
};

// Behavioral niche of one genotype, simulated from scratch.
inline std::uint16_t simulate_niche(const Maze& maze, const RobotParams& params,
                                    const FixedAnnGenome& genome) {
    FixedAnnController controller(genome);
    return evaluate_controller(maze, controller, params).niche.cell_id();
}

// Phase 1: niche of every genotype in the space.
inline std::vector<std::uint16_t> tabulate_niches(const Maze& maze, const RobotParams& params,
                                                  const ReducedSpace& space,
                                                  unsigned threads = 0) {
    std::vector<std::uint16_t> niches(space.size(), kNicheUnset);
    parallel_chunks(space.size(), threads, 1024, [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t id = begin; id < end; ++id)
            niches[id] = simulate_niche(maze, params, space.genome(id));
    });
    return niches;
}

// Phase 2: records for [begin, end) from the completed niche array.
inline std::vector<LookupRecord> records_from_niches(const ReducedSpace& space,
                                                     std::span<const std::uint16_t> niches,
                                                     std::uint64_t begin, std::uint64_t end,
                                                     unsigned threads = 0) {
    if (end < begin || end > space.size() || niches.size() != space.size())
        throw ConfigError("records_from_niches: range/space mismatch");
    std::vector<LookupRecord> records(end - begin);
    const std::uint32_t n_neighbors = space.neighbor_count();
    parallel_chunks(end - begin, threads, 4096, [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<std::uint32_t> stamp(kNicheCellCount, 0);
        std::uint32_t epoch = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            const std::uint64_t id = begin + i;
            ++epoch;
            std::uint32_t distinct = 0;
            for (std::uint32_t w = 0; w < n_neighbors; ++w) {
                const std::uint16_t cell = niches[space.neighbor(id, w)];
                if (stamp[cell] != epoch) {
                    stamp[cell] = epoch;
                    ++distinct;
                }
            }
            records[i] = LookupRecord{niches[id], static_cast<std::uint8_t>(distinct), 1};
        }
    });
    return records;
}

// Full tabulation of [begin, end): simulate, then count neighbor niches.
inline std::vector<LookupRecord> tabulate(const Maze& maze, const RobotParams& params,
                                          const ReducedSpace& space, std::uint64_t begin,
                                          std::uint64_t end, unsigned threads = 0) {
    if (end < begin || end > space.size()) throw ConfigError("tabulate: id range out of bounds");
    const std::vector<std::uint16_t> niches = tabulate_niches(maze, params, space, threads);
    return records_from_niches(space, niches, begin, end, threads);
}

// Parent-offspring evolvability correlation: parents sampled uniformly, each
// paired with one uniform single-mutation offspring.
inline CorrelationResult heritability(std::span<const LookupRecord> records,
                                      const ReducedSpace& space, std::size_t sample_size,
                                      Rng& rng) {
    if (records.size() != space.size()) throw ConfigError("heritability: table/space mismatch");
    if (space.neighbor_count() == 0) return CorrelationResult{};
    std::vector<double> parent(sample_size), offspring(sample_size);
    for (std::size_t i = 0; i < sample_size; ++i) {
        const std::uint64_t p = rng.uniform_int(space.size());
        const std::uint64_t o = space.neighbor(p, static_cast<std::uint32_t>(
                                                      rng.uniform_int(space.neighbor_count())));
        parent[i] = records[p].evolvability;
        offspring[i] = records[o].evolvability;
    }
    return pearson(parent, offspring);
}

// ---------------------------------------------------------------------------
// Shard and manifest I/O
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace detail

inline std::string encode_shard(std::uint64_t start_id, std::span<const LookupRecord> records) {
    std::string out;
    out.reserve(kShardHeaderBytes + records.size() * 4);
    out += "EVLT";
    detail::put_u16(out, kShardFormatVersion);
    detail::put_u64(out, start_id);
    detail::put_u64(out, records.size());
    out.append(kShardHeaderBytes - out.size(), '\0');
    for (const auto& r : records) {
        detail::put_u16(out, r.niche);
        out.push_back(static_cast<char>(r.evolvability));
        out.push_back(static_cast<char>(r.flags));
    }
    return out;
}

struct ShardData {
    std::uint64_t start_id = 0;
    std::vector<LookupRecord> records;
};

inline ShardData decode_shard(std::span<const unsigned char> bytes, const std::string& name) {
    if (bytes.size() < kShardHeaderBytes || std::memcmp(bytes.data(), "EVLT", 4) != 0)
        throw ConfigError("shard " + name + ": bad magic/truncated header");
    const std::uint16_t version = detail::get_u16(bytes.data() + 4);
    if (version != kShardFormatVersion)
        throw ConfigError("shard " + name + ": unsupported format version " +
                          std::to_string(version));
    ShardData shard;
    shard.start_id = detail::get_u64(bytes.data() + 6);
    const std::uint64_t count = detail::get_u64(bytes.data() + 14);
    if (bytes.size() != kShardHeaderBytes + count * 4)
        throw ConfigError("shard " + name + ": size does not match record count");
    shard.records.resize(count);
    const unsigned char* p = bytes.data() + kShardHeaderBytes;
    for (std::uint64_t i = 0; i < count; ++i, p += 4) {
        shard.records[i] = LookupRecord{detail::get_u16(p), p[2], p[3]};
        if (!shard.records[i].valid())
            throw ConfigError("shard " + name + ": invalid record at index " + std::to_string(i));
    }
    return shard;
}

inline void write_shard_file(const std::filesystem::path& path, std::uint64_t start_id,
                             std::span<const LookupRecord> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write shard: " + path.string());
    const std::string bytes = encode_shard(start_id, records);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("short write on shard: " + path.string());
}

inline ShardData read_shard_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open shard: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_shard(
        std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(data.data()),
                                       data.size()),
        path.filename().string());
}

struct TableShardEntry {
    std::string file;
    std::uint64_t start = 0;
    std::uint64_t count = 0;
};

struct TableManifest {
    GeneMask mask = GeneMask::all_free();
    RobotParams robot;
    std::string maze_file;    // relative to the manifest directory
    std::string maze_digest;  // fnv1a-64 of the maze file content
    std::vector<TableShardEntry> shards;
};

inline nlohmann::json robot_params_to_json(const RobotParams& p) {
    return nlohmann::json{{"sensor_angles", p.sensor_angles}, {"sensor_range", p.sensor_range},
                          {"max_speed", p.max_speed},         {"max_turn", p.max_turn},
                          {"robot_radius", p.robot_radius},   {"timesteps", p.timesteps}};
}

inline RobotParams robot_params_from_json(const nlohmann::json& j) {
    RobotParams p;
    p.sensor_angles = j.at("sensor_angles").get<std::vector<double>>();
    p.sensor_range = j.at("sensor_range").get<double>();
    p.max_speed = j.at("max_speed").get<double>();
    p.max_turn = j.at("max_turn").get<double>();
    p.robot_radius = j.at("robot_radius").get<double>();
    p.timesteps = j.at("timesteps").get<std::uint32_t>();
    p.validate();
    return p;
}

inline void write_table_manifest(const std::filesystem::path& path, const TableManifest& m) {
    nlohmann::json j;
    j["format"] = "evodrift-lookup-table";
    j["format_version"] = kShardFormatVersion;
    j["mask"] = m.mask.to_string();
    j["space_size"] = ReducedSpace(m.mask).size();
    j["maze_file"] = m.maze_file;
    j["maze_digest"] = m.maze_digest;
    j["robot"] = robot_params_to_json(m.robot);
    j["shards"] = nlohmann::json::array();
    for (const auto& s : m.shards)
        j["shards"].push_back({{"file", s.file}, {"start", s.start}, {"count", s.count}});
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write table manifest: " + path.string());
    out << j.dump(2) << '\n';
}

struct LookupTable {
    GeneMask mask = GeneMask::all_free();
    RobotParams robot;
    std::string maze_path;  // resolved path of the maze the table was built from
    std::vector<LookupRecord> records;
};

inline std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file for digest: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return digest_hex(data);
}

// Loads and verifies a sharded table: maze digest must match and the shards
// must cover [0, space_size) exactly once.
inline LookupTable load_table(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open table manifest: " + manifest_path.string());
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != std::string("evodrift-lookup-table"))
        throw ConfigError("table manifest: unrecognized format field");
    LookupTable table;
    table.mask = GeneMask::parse(j.at("mask").get<std::string>());
    table.robot = robot_params_from_json(j.at("robot"));
    const ReducedSpace space(table.mask);
    const std::uint64_t expected_size = j.at("space_size").get<std::uint64_t>();
    if (expected_size != space.size())
        throw ConfigError("table manifest: space_size does not match mask");

    const std::filesystem::path dir = manifest_path.parent_path();
    const std::filesystem::path maze_path = dir / j.at("maze_file").get<std::string>();
    const std::string digest = file_digest(maze_path);
    if (digest != j.at("maze_digest").get<std::string>())
        throw ConfigError("table manifest: maze digest mismatch (expected " +
                          j.at("maze_digest").get<std::string>() + ", file has " + digest + ")");
    table.maze_path = maze_path.string();

    struct Entry {
        std::uint64_t start;
        std::uint64_t count;
        std::string file;
    };
    std::vector<Entry> entries;
    for (const auto& s : j.at("shards"))
        entries.push_back(Entry{s.at("start").get<std::uint64_t>(),
                                s.at("count").get<std::uint64_t>(),
                                s.at("file").get<std::string>()});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.start < b.start; });
    std::uint64_t expected_start = 0;
    for (const auto& e : entries) {
        if (e.start != expected_start)
            throw ConfigError("table shards do not tile the id range: expected start " +
                              std::to_string(expected_start) + ", got " + std::to_string(e.start) +
                              " (" + e.file + ")");
        expected_start += e.count;
    }
    if (expected_start != space.size())
        throw ConfigError("table shards cover " + std::to_string(expected_start) + " ids, space has " +
                          std::to_string(space.size()));

    table.records.reserve(space.size());
    for (const auto& e : entries) {
        ShardData shard = read_shard_file(dir / e.file);
        if (shard.start_id != e.start || shard.records.size() != e.count)
            throw ConfigError("shard " + e.file + ": header disagrees with manifest");
        table.records.insert(table.records.end(), shard.records.begin(), shard.records.end());
    }
    return table;
}

}  // namespace evodrift
