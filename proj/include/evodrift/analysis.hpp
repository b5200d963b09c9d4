#pragma once

// Cross-run analysis of final populations: per-niche mean evolvability, niche
// heat maps, and the distance-vs-evolvability profile with its correlations.
// Population snapshots from all runs of a battery are pooled organism by
// organism; heat-map cells and per-niche statistics average over that pool.
//
// The distance profile reports three Pearson correlations of evolvability
// against distance from the origin niche, at three levels of pooling:
//   organisms - one data point per pooled organism,
//   niches    - one point per occupied niche (its pooled mean evolvability),
//   binned    - one point per integer-rounded distance bin.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evodrift/abstract.hpp"
#include "evodrift/common.hpp"
#include "evodrift/maze.hpp"
#include "evodrift/niche_map.hpp"
#include "evodrift/stats.hpp"

namespace evodrift {

// Unweighted mean over occupied niches of the within-niche mean value.
// Entries are (niche key, value) pairs; the key encoding is irrelevant.
inline double per_niche_mean(std::span<const std::pair<std::uint64_t, double>> organisms) {
    if (organisms.empty()) throw ConfigError("per_niche_mean: empty snapshot");
    NicheMap<NicheStatAcc> acc;
    for (const auto& [key, value] : organisms) {
        NicheStatAcc& a = acc[key];
        a.sum += value;
        ++a.count;
    }
    double total = 0.0;
    acc.for_each([&](std::uint64_t, const NicheStatAcc& a) { total += a.sum / a.count; });
    return total / static_cast<double>(acc.size());
}

enum class DistanceMetric { euclidean, manhattan };

inline double niche_distance(double dx, double dy, DistanceMetric metric) {
    return metric == DistanceMetric::euclidean ? std::sqrt(dx * dx + dy * dy)
                                               : std::fabs(dx) + std::fabs(dy);
}

struct DistanceBin {
    std::int64_t distance = 0;  // rounded to the nearest integer
    double mean_evolvability = 0.0;
    std::uint64_t organisms = 0;
};

struct DistanceProfile {
    std::vector<DistanceBin> bins;
    CorrelationResult organisms;
    CorrelationResult niches;
    CorrelationResult binned;
};

// Heat map over the occupied bounding box (abstract models) or the fixed
// 20x20 grid (robot models). Unoccupied cells are NaN, never zero.
struct Heatmap {
    std::int64_t origin_x = 0;
    std::int64_t origin_y = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::vector<double> cells;  // row-major, row 0 at origin_y

    double at(std::uint32_t x, std::uint32_t y) const { return cells[y * width + x]; }
};

// Pools final organisms across runs keyed by 2D niche point. Add runs in a
// fixed order; statistics are extracted once at the end.
class NichePool {
  public:
    explicit NichePool(DistanceMetric metric = DistanceMetric::euclidean,
                       double origin_x = 0.0, double origin_y = 0.0)
        : metric_(metric), origin_x_(origin_x), origin_y_(origin_y) {}

    void add(std::int32_t x, std::int32_t y, double evolvability) {
        NicheStatAcc& a = acc_[pack_niche(x, y)];
        a.sum += evolvability;
        ++a.count;
        organism_corr_.add(distance_of(x, y), evolvability);
        auto& bin = bins_[std::llround(distance_of(x, y))];
        bin.first += evolvability;
        ++bin.second;
        ++total_;
    }

    void add(const Population& pop) {
        for (const auto& org : pop.organisms) add(org.x, org.y, org.evolvability);
    }

    std::uint64_t organism_count() const { return total_; }

    DistanceProfile distance_profile() const {
        if (total_ == 0) throw ConfigError("distance profile: empty pool");
        DistanceProfile out;
        out.organisms = organism_corr_.result();
        std::vector<double> bx, by;
        for (const auto& [dist, acc] : bins_) {
            out.bins.push_back(DistanceBin{dist, acc.first / static_cast<double>(acc.second),
                                           static_cast<std::uint64_t>(acc.second)});
            bx.push_back(static_cast<double>(dist));
            by.push_back(acc.first / static_cast<double>(acc.second));
        }
        out.binned = pearson(bx, by);
        std::vector<double> nx, ny;
        nx.reserve(acc_.size());
        ny.reserve(acc_.size());
        acc_.for_each([&](std::uint64_t key, const NicheStatAcc& a) {
            nx.push_back(distance_of(niche_x(key), niche_y(key)));
            ny.push_back(a.sum / a.count);
        });
        out.niches = pearson(nx, ny);
        return out;
    }

    Heatmap heatmap() const {
        if (total_ == 0) throw ConfigError("heatmap: empty pool");
        std::int64_t min_x = std::numeric_limits<std::int64_t>::max(), min_y = min_x;
        std::int64_t max_x = std::numeric_limits<std::int64_t>::min(), max_y = max_x;
        acc_.for_each([&](std::uint64_t key, const NicheStatAcc&) {
            min_x = std::min<std::int64_t>(min_x, niche_x(key));
            max_x = std::max<std::int64_t>(max_x, niche_x(key));
            min_y = std::min<std::int64_t>(min_y, niche_y(key));
            max_y = std::max<std::int64_t>(max_y, niche_y(key));
        });
        Heatmap hm;
        hm.origin_x = min_x;
        hm.origin_y = min_y;
        hm.width = static_cast<std::uint32_t>(max_x - min_x + 1);
        hm.height = static_cast<std::uint32_t>(max_y - min_y + 1);
        hm.cells.assign(static_cast<std::size_t>(hm.width) * hm.height,
                        std::numeric_limits<double>::quiet_NaN());
        acc_.for_each([&](std::uint64_t key, const NicheStatAcc& a) {
            const std::size_t col = static_cast<std::size_t>(niche_x(key) - min_x);
            const std::size_t row = static_cast<std::size_t>(niche_y(key) - min_y);
            hm.cells[row * hm.width + col] = a.sum / a.count;
        });
        return hm;
    }

  private:
    double distance_of(std::int32_t x, std::int32_t y) const {
        return niche_distance(x - origin_x_, y - origin_y_, metric_);
    }

    DistanceMetric metric_;
    double origin_x_, origin_y_;
    NicheMap<NicheStatAcc> acc_;
    StreamingCorrelation organism_corr_;
    std::map<std::int64_t, std::pair<double, std::uint64_t>> bins_;
    std::uint64_t total_ = 0;
};

// Pool over the robot models' fixed 20x20 behavior grid; the origin is the
// niche cell of the maze start.
class CellPool {
  public:
    explicit CellPool(std::uint16_t origin_cell = 0,
                      DistanceMetric metric = DistanceMetric::euclidean)
        : pool_(metric, origin_cell % kNicheGridSide, origin_cell / kNicheGridSide) {}

    void add(std::uint16_t cell, double evolvability) {
        pool_.add(cell % kNicheGridSide, cell / kNicheGridSide, evolvability);
    }

    std::uint64_t organism_count() const { return pool_.organism_count(); }
    DistanceProfile distance_profile() const { return pool_.distance_profile(); }

    Heatmap heatmap() const {
        Heatmap box = pool_.heatmap();
        Heatmap hm;
        hm.width = hm.height = kNicheGridSide;
        hm.cells.assign(kNicheCellCount, std::numeric_limits<double>::quiet_NaN());
        for (std::uint32_t y = 0; y < box.height; ++y) {
            for (std::uint32_t x = 0; x < box.width; ++x) {
                hm.cells[(y + box.origin_y) * kNicheGridSide + (x + box.origin_x)] = box.at(x, y);
            }
        }
        return hm;
    }

  private:
    NichePool pool_;
};

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

// Matrix CSV with NA for unoccupied cells; the leading sidecar row carries
// the bounding-box origin so cell (0,0) of the matrix can be placed.
inline std::string heatmap_to_csv(const Heatmap& hm) {
    std::string out = "origin," + std::to_string(hm.origin_x) + "," +
                      std::to_string(hm.origin_y) + "\n";
    for (std::uint32_t y = 0; y < hm.height; ++y) {
        for (std::uint32_t x = 0; x < hm.width; ++x) {
            if (x > 0) out += ',';
            const double v = hm.at(x, y);
            out += std::isnan(v) ? "NA" : format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline std::string distance_profile_to_csv(const DistanceProfile& profile) {
    std::string out = "distance,mean_evolvability,organisms\n";
    for (const auto& bin : profile.bins) {
        out += std::to_string(bin.distance);
        out += ',';
        out += format_double(bin.mean_evolvability);
        out += ',';
        out += std::to_string(bin.organisms);
        out += '\n';
    }
    return out;
}

inline nlohmann::json correlation_to_json(const CorrelationResult& c) {
    nlohmann::json j;
    j["defined"] = c.defined;
    j["n"] = c.n;
    if (c.defined) {
        j["r"] = c.r;
        j["p"] = c.p;
        j["slope"] = c.slope;
        j["intercept"] = c.intercept;
    }
    return j;
}

inline std::string distance_correlations_to_json(const DistanceProfile& profile) {
    nlohmann::json j;
    j["organisms"] = correlation_to_json(profile.organisms);
    j["niches"] = correlation_to_json(profile.niches);
    j["binned"] = correlation_to_json(profile.binned);
    return j.dump(2) + "\n";
}

// Final-population snapshots (one row per organism).
inline constexpr const char* kAbstractFinalHeader = "niche_x,niche_y,evolvability";
inline constexpr const char* kCellFinalHeader = "cell,evolvability";

inline std::string abstract_final_to_csv(const Population& pop) {
    std::string out(kAbstractFinalHeader);
    out += '\n';
    for (const auto& org : pop.organisms) {
        out += std::to_string(org.x);
        out += ',';
        out += std::to_string(org.y);
        out += ',';
        out += format_double(org.evolvability);
        out += '\n';
    }
    return out;
}

struct CellOrganism {
    std::uint16_t cell = 0;
    double evolvability = 0.0;
};

inline std::string cell_final_to_csv(std::span<const CellOrganism> organisms) {
    std::string out(kCellFinalHeader);
    out += '\n';
    for (const auto& org : organisms) {
        out += std::to_string(org.cell);
        out += ',';
        out += format_double(org.evolvability);
        out += '\n';
    }
    return out;
}

inline Population abstract_final_from_csv(std::istream& in) {
    Population pop;
    std::string line;
    if (!std::getline(in, line) || line != kAbstractFinalHeader)
        throw ConfigError("final population: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c, ','))
            throw ConfigError("final population: short row: " + line);
        pop.organisms.push_back(
            AbstractOrganism{std::stoi(a), std::stoi(b), std::stod(c)});
    }
    return pop;
}

inline std::vector<CellOrganism> cell_final_from_csv(std::istream& in) {
    std::vector<CellOrganism> out;
    std::string line;
    if (!std::getline(in, line) || line != kCellFinalHeader)
        throw ConfigError("final population: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ','))
            throw ConfigError("final population: short row: " + line);
        out.push_back(CellOrganism{static_cast<std::uint16_t>(std::stoul(a)), std::stod(b)});
    }
    return out;
}

}  // namespace evodrift
