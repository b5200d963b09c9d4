#pragma once

// Walled 2D maze with a differential-drive robot. A trial runs a controller
// for a fixed number of timesteps (sense -> activate -> move) and maps the
// final position to one cell of a 20x20 behavior grid over the maze bounds.
// The simulation itself is deterministic: no noise anywhere.
//
// Kinematics per step, for motor commands (left, right) in [0,1]^2:
//   heading  += (left - right) * max_turn
//   position += ((left + right) / 2) * max_speed  along the new heading
// A move whose swept body would touch a wall (or leave the bounds) is
// resolved by axis-separable sliding: try the x component alone, then the y
// component alone, otherwise stay put.

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "evodrift/common.hpp"

namespace evodrift {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Segment {
    Vec2 a, b;
};

struct Rect {
    Vec2 min, max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }

    bool contains(Vec2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
};

namespace geom {

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

inline double point_segment_distance(Vec2 p, const Segment& s) {
    const Vec2 d = sub(s.b, s.a);
    const double len2 = dot(d, d);
    if (len2 <= 0.0) return norm(sub(p, s.a));
    double t = dot(sub(p, s.a), d) / len2;
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return norm(sub(p, Vec2{s.a.x + t * d.x, s.a.y + t * d.y}));
}

inline bool segments_intersect(const Segment& s1, const Segment& s2) {
    const Vec2 r = sub(s1.b, s1.a);
    const Vec2 s = sub(s2.b, s2.a);
    const double denom = cross(r, s);
    const Vec2 qp = sub(s2.a, s1.a);
    if (denom == 0.0) return false;  // parallel/collinear handled by distance fallback
    const double t = cross(qp, s) / denom;
    const double u = cross(qp, r) / denom;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

inline double segment_segment_distance(const Segment& s1, const Segment& s2) {
    if (segments_intersect(s1, s2)) return 0.0;
    double d = point_segment_distance(s1.a, s2);
    d = std::min(d, point_segment_distance(s1.b, s2));
    d = std::min(d, point_segment_distance(s2.a, s1));
    d = std::min(d, point_segment_distance(s2.b, s1));
    return d;
}

// Distance along a ray from `origin` in direction `dir` (unit) to the segment,
// or a negative value when the ray misses it.
inline double ray_segment_hit(Vec2 origin, Vec2 dir, const Segment& seg) {
    const Vec2 e = sub(seg.b, seg.a);
    const double denom = cross(dir, e);
    if (std::fabs(denom) < 1e-12) return -1.0;
    const Vec2 ao = sub(seg.a, origin);
    const double t = cross(ao, e) / denom;
    const double s = cross(ao, dir) / denom;
    if (t < 0.0 || s < 0.0 || s > 1.0) return -1.0;
    return t;
}

}  // namespace geom

struct Maze {
    std::vector<Segment> walls;
    Vec2 start;
    double start_heading = 0.0;
    Rect bounds;  // hull of all geometry and the start, expanded by the robot radius
};

struct RobotState {
    Vec2 position;
    double heading = 0.0;
    double radius = 4.0;
};

struct RobotParams {
    std::vector<double> sensor_angles{-M_PI / 4.0, 0.0, M_PI / 4.0};  // relative to heading
    double sensor_range = 100.0;
    double max_speed = 3.0;
    double max_turn = 0.25;
    double robot_radius = 4.0;
    std::uint32_t timesteps = 400;

    static RobotParams three_sensor() { return RobotParams{}; }

    static RobotParams six_sensor() {
        RobotParams p;
        p.sensor_angles = {-M_PI / 2.0, -M_PI / 4.0, 0.0, M_PI / 4.0, M_PI / 2.0, M_PI};
        return p;
    }

    void validate() const {
        if (sensor_angles.empty()) throw ConfigError("robot: no sensors");
        if (sensor_range <= 0.0) throw ConfigError("robot: sensor_range <= 0");
        if (max_speed < 0.0) throw ConfigError("robot: max_speed < 0");
        if (max_turn < 0.0) throw ConfigError("robot: max_turn < 0");
        if (robot_radius <= 0.0) throw ConfigError("robot: robot_radius <= 0");
        if (timesteps < 1) throw ConfigError("robot: timesteps < 1");
    }
};

struct BehaviorNiche {
    std::int32_t cx = 0;
    std::int32_t cy = 0;

    std::uint16_t cell_id() const { return static_cast<std::uint16_t>(cy * 20 + cx); }
};

inline constexpr std::uint32_t kNicheGridSide = 20;
inline constexpr std::uint32_t kNicheCellCount = kNicheGridSide * kNicheGridSide;

// cell = floor(20 * (position - bounds.min) / bounds.extent); the upper
// boundary maps into index 19.
inline BehaviorNiche niche_of(Vec2 position, const Rect& bounds) {
    auto axis = [](double v, double lo, double extent) {
        std::int32_t c = static_cast<std::int32_t>(
            std::floor(kNicheGridSide * (v - lo) / extent));
        if (c < 0) c = 0;
        if (c >= static_cast<std::int32_t>(kNicheGridSide)) c = kNicheGridSide - 1;
        return c;
    };
    return BehaviorNiche{axis(position.x, bounds.min.x, bounds.width()),
                         axis(position.y, bounds.min.y, bounds.height())};
}

// Normalized rangefinder reading: min(distance to nearest wall, range) / range.
inline double raycast(const Maze& maze, Vec2 origin, double direction, double range) {
    const Vec2 dir{std::cos(direction), std::sin(direction)};
    double nearest = range;
    for (const auto& wall : maze.walls) {
        const double t = geom::ray_segment_hit(origin, dir, wall);
        if (t >= 0.0 && t < nearest) nearest = t;
    }
    return nearest / range;
}

inline void sense(const Maze& maze, const RobotState& state, const RobotParams& params,
                  std::vector<double>& out) {
    out.resize(params.sensor_angles.size());
    for (std::size_t i = 0; i < params.sensor_angles.size(); ++i)
        out[i] = raycast(maze, state.position, state.heading + params.sensor_angles[i],
                         params.sensor_range);
}

namespace detail {

inline bool move_blocked(const Maze& maze, Vec2 from, Vec2 to, double radius) {
    if (!maze.bounds.contains(to)) return true;
    const Segment sweep{from, to};
    for (const auto& wall : maze.walls) {
        if (geom::segment_segment_distance(sweep, wall) < radius) return true;
    }
    return false;
}

inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    if (a < -M_PI) a += 2.0 * M_PI;
    if (a >= M_PI) a -= 2.0 * M_PI;
    return a;
}

}  // namespace detail

inline RobotState step_robot(const Maze& maze, const RobotState& state, double left,
                             double right, const RobotParams& params) {
    RobotState next = state;
    next.heading = detail::wrap_angle(state.heading + (left - right) * params.max_turn);
    const double dist = 0.5 * (left + right) * params.max_speed;
    const Vec2 target{state.position.x + dist * std::cos(next.heading),
                      state.position.y + dist * std::sin(next.heading)};
    const Vec2 candidates[3] = {target,
                                {target.x, state.position.y},   // x-only slide
                                {state.position.x, target.y}};  // y-only slide
    for (const Vec2& c : candidates) {
        if (!detail::move_blocked(maze, state.position, c, state.radius)) {
            next.position = c;
            return next;
        }
    }
    return next;  // both axes blocked: position unchanged
}

template <typename C>
concept RobotController = requires(C c, std::span<const double> sensors) {
    { c.reset() };
    { c.act(sensors) } -> std::convertible_to<std::array<double, 2>>;
};

struct TrialResult {
    Vec2 final_position;
    BehaviorNiche niche;
};

// Resets the controller, runs `timesteps` iterations of sense -> activate ->
// step_robot, and reports where the robot ended up.
template <RobotController C>
TrialResult evaluate_controller(const Maze& maze, C& controller, const RobotParams& params) {
    RobotState state{maze.start, maze.start_heading, params.robot_radius};
    controller.reset();
    std::vector<double> sensors;
    for (std::uint32_t t = 0; t < params.timesteps; ++t) {
        sense(maze, state, params, sensors);
        const std::array<double, 2> motors = controller.act(sensors);
        state = step_robot(maze, state, clamp01(motors[0]), clamp01(motors[1]), params);
    }
    return TrialResult{state.position, niche_of(state.position, maze.bounds)};
}

// Maze file format: `start x y heading_radians` once, then `wall x1 y1 x2 y2`
// lines; `#` begins a comment. Bounds are the hull of all geometry expanded
// by the robot radius.
inline Maze parse_maze(const std::string& text, double robot_radius) {
    Maze maze;
    bool have_start = false;
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    auto grow = [&](Vec2 p) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    };
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        if (kind == "start") {
            if (have_start) throw ConfigError("maze: duplicate start at line " + std::to_string(lineno));
            if (!(ls >> maze.start.x >> maze.start.y >> maze.start_heading))
                throw ConfigError("maze: malformed start at line " + std::to_string(lineno));
            have_start = true;
            grow(maze.start);
        } else if (kind == "wall") {
            Segment s;
            if (!(ls >> s.a.x >> s.a.y >> s.b.x >> s.b.y))
                throw ConfigError("maze: malformed wall at line " + std::to_string(lineno));
            maze.walls.push_back(s);
            grow(s.a);
            grow(s.b);
        } else {
            throw ConfigError("maze: unknown directive '" + kind + "' at line " +
                              std::to_string(lineno));
        }
    }
    if (!have_start) throw ConfigError("maze: missing start line");
    maze.bounds = Rect{{lo.x - robot_radius, lo.y - robot_radius},
                       {hi.x + robot_radius, hi.y + robot_radius}};
    if (maze.bounds.width() <= 0.0 || maze.bounds.height() <= 0.0)
        throw ConfigError("maze: bounds have no area");
    for (const auto& wall : maze.walls) {
        if (geom::point_segment_distance(maze.start, wall) < robot_radius)
            throw ConfigError("maze: start position intersects a wall");
    }
    return maze;
}

inline Maze load_maze(const std::string& path, double robot_radius) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open maze file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_maze(ss.str(), robot_radius);
}

}  // namespace evodrift
