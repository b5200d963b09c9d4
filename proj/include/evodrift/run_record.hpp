#pragma once

// Per-run statistics stream. Every model emits one row per checkpoint with
// the same six columns; aggregate_runs() folds a battery of records into a
// pointwise mean +/- standard-error series.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "evodrift/common.hpp"
#include "evodrift/stats.hpp"

namespace evodrift {

struct RunRecordRow {
    std::uint64_t checkpoint = 0;  // generation, or evaluation count for the practical model
    std::uint64_t pop_size = 0;
    double pop_mean_evolvability = 0.0;
    double niche_mean_evolvability = 0.0;  // mean within each occupied niche, then over niches
    std::uint64_t occupied_niches = 0;
    std::uint64_t cumulative_individuals = 0;
};

struct RunRecord {
    std::vector<RunRecordRow> rows;
};

inline constexpr const char* kRunRecordHeader =
    "checkpoint,pop_size,pop_mean_evolvability,niche_mean_evolvability,"
    "occupied_niches,cumulative_individuals";

inline std::string run_record_to_csv(const RunRecord& rec) {
    std::string out(kRunRecordHeader);
    out += '\n';
    for (const auto& r : rec.rows) {
        out += std::to_string(r.checkpoint);
        out += ',';
        out += std::to_string(r.pop_size);
        out += ',';
        out += format_double(r.pop_mean_evolvability);
        out += ',';
        out += format_double(r.niche_mean_evolvability);
        out += ',';
        out += std::to_string(r.occupied_niches);
        out += ',';
        out += std::to_string(r.cumulative_individuals);
        out += '\n';
    }
    return out;
}

inline RunRecord run_record_from_csv(std::istream& in) {
    RunRecord rec;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("run record: empty file");
    if (line != kRunRecordHeader) throw ConfigError("run record: unexpected header: " + line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        RunRecordRow row;
        std::istringstream ls(line);
        std::string field;
        auto next = [&]() {
            if (!std::getline(ls, field, ',')) throw ConfigError("run record: short row: " + line);
            return field;
        };
        row.checkpoint = std::stoull(next());
        row.pop_size = std::stoull(next());
        row.pop_mean_evolvability = std::stod(next());
        row.niche_mean_evolvability = std::stod(next());
        row.occupied_niches = std::stoull(next());
        row.cumulative_individuals = std::stoull(next());
        rec.rows.push_back(row);
    }
    return rec;
}

inline RunRecord load_run_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run record: " + path);
    return run_record_from_csv(in);
}

// Across-run mean and standard error at each shared checkpoint.
struct AggregateRow {
    std::uint64_t checkpoint = 0;
    double mean_pop_size = 0.0, se_pop_size = 0.0;
    double mean_pop_evolvability = 0.0, se_pop_evolvability = 0.0;
    double mean_niche_evolvability = 0.0, se_niche_evolvability = 0.0;
    double mean_occupied_niches = 0.0, se_occupied_niches = 0.0;
    double mean_cumulative = 0.0, se_cumulative = 0.0;
};

struct AggregateSeries {
    std::vector<AggregateRow> rows;
};

// Rejects records whose checkpoint schedules differ.
inline AggregateSeries aggregate_runs(const std::vector<RunRecord>& runs) {
    if (runs.empty()) throw ConfigError("aggregate_runs: no runs");
    const std::size_t n_rows = runs.front().rows.size();
    for (const auto& r : runs) {
        if (r.rows.size() != n_rows) throw ConfigError("aggregate_runs: checkpoint schedules differ");
        for (std::size_t i = 0; i < n_rows; ++i) {
            if (r.rows[i].checkpoint != runs.front().rows[i].checkpoint)
                throw ConfigError("aggregate_runs: checkpoint schedules differ");
        }
    }
    AggregateSeries agg;
    agg.rows.resize(n_rows);
    std::vector<double> vals(runs.size());
    for (std::size_t i = 0; i < n_rows; ++i) {
        AggregateRow& row = agg.rows[i];
        row.checkpoint = runs.front().rows[i].checkpoint;
        auto fill = [&](auto getter, double& mean, double& se) {
            for (std::size_t k = 0; k < runs.size(); ++k) vals[k] = getter(runs[k].rows[i]);
            mean = mean_of(vals);
            se = standard_error(vals);
        };
        fill([](const RunRecordRow& r) { return static_cast<double>(r.pop_size); },
             row.mean_pop_size, row.se_pop_size);
        fill([](const RunRecordRow& r) { return r.pop_mean_evolvability; },
             row.mean_pop_evolvability, row.se_pop_evolvability);
        fill([](const RunRecordRow& r) { return r.niche_mean_evolvability; },
             row.mean_niche_evolvability, row.se_niche_evolvability);
        fill([](const RunRecordRow& r) { return static_cast<double>(r.occupied_niches); },
             row.mean_occupied_niches, row.se_occupied_niches);
        fill([](const RunRecordRow& r) { return static_cast<double>(r.cumulative_individuals); },
             row.mean_cumulative, row.se_cumulative);
    }
    return agg;
}

inline std::string aggregate_to_csv(const AggregateSeries& agg) {
    std::string out =
        "checkpoint,mean_pop_size,se_pop_size,mean_pop_evolvability,se_pop_evolvability,"
        "mean_niche_evolvability,se_niche_evolvability,mean_occupied_niches,se_occupied_niches,"
        "mean_cumulative_individuals,se_cumulative_individuals\n";
    for (const auto& r : agg.rows) {
        out += std::to_string(r.checkpoint);
        for (double v : {r.mean_pop_size, r.se_pop_size, r.mean_pop_evolvability,
                         r.se_pop_evolvability, r.mean_niche_evolvability, r.se_niche_evolvability,
                         r.mean_occupied_niches, r.se_occupied_niches, r.mean_cumulative,
                         r.se_cumulative}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace evodrift
