#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "egotop/features.hpp"
#include "egotop/geometry.hpp"

namespace egotop {

struct Landmark {
    Point2 position = Point2::Zero();
    Eigen::VectorXd appearance;  // unit norm
};

/// Static scene the agents walk through. Landmarks stand in for whatever an egocentric
/// camera would see.
struct World {
    double width = 10.0;
    double height = 10.0;
    std::vector<Landmark> landmarks;
    std::uint64_t seed = 0;

    double diameter() const { return std::hypot(width, height); }
};

enum class IntruderPolicy { Walk, Loiter };

struct ScenarioConfig {
    std::size_t n_top = 6;
    std::size_t n_ego = 6;
    std::size_t duration_frames = 400;
    double frame_rate = 10.0;
    std::vector<int> true_delays;  // per ego video, frames; empty means all zero
    double descriptor_noise_sigma = 0.0;
    double count_noise_rate = 0.0;

    // Motion: random waypoints, smoothed by a bounded turn rate. waypoint_count > 0 makes
    // each agent cycle through that many fixed waypoints instead of drawing fresh ones.
    std::size_t waypoint_count = 0;
    double speed_min = 0.5;  // m/s
    double speed_max = 2.0;
    double turn_rate_deg = 180.0;  // deg/s
    IntruderPolicy intruders = IntruderPolicy::Walk;

    double arena_width = 10.0;
    double arena_height = 10.0;
    double landmark_margin = 3.0;  // landmarks also sit this far outside the arena
    std::size_t n_landmarks = 80;
    std::size_t descriptor_dim = 32;
    double half_angle_deg = 30.0;
    std::optional<double> range_m;  // unset: arena diagonal

    std::uint64_t seed = 1;

    void validate() const;
    double range() const { return range_m ? *range_m : std::hypot(arena_width, arena_height); }
};

struct Scenario {
    ScenarioConfig config;
    World world;
    std::vector<Trajectory> trajectories;  // all n_top viewers, top-view frames [0, T)
    std::vector<EgoVideo> ego;             // n_ego videos
    std::vector<std::size_t> truth;        // ego k was recorded by trajectories[truth[k]]
    std::vector<int> delays;               // per ego video
};

World make_world(const ScenarioConfig& cfg);

/// Agent paths over world frames [first_frame, first_frame + frames).
std::vector<Trajectory> simulate_agents(const ScenarioConfig& cfg, std::int64_t first_frame, std::size_t frames);

/// Descriptor of what a cone sees: landmark appearances weighted by 1 / (1 + distance),
/// L2-normalised (zero if nothing is visible).
Eigen::VectorXd render_view(const World& world, const FovCone& cone, std::size_t dim);

/// Egocentric stream of agent `owner` over `frames` frames starting at world frame
/// `start` (an index into the agent paths). Noise comes from `rng`.
EgoVideo render_ego(const World& world, std::span<const Trajectory> agents, std::size_t owner, std::size_t start,
                    std::size_t frames, const ScenarioConfig& cfg, const std::string& video_id, std::mt19937_64& rng);

/// Deterministic in cfg.seed.
Scenario generate(const ScenarioConfig& cfg);

/// Writes topview.csv, ego_<k>.desc (+ .json sidecar), ego_<k>.counts.csv, truth.json
/// and config.json into `dir`, creating it if needed.
void emit(const Scenario& scenario, const std::filesystem::path& dir);

std::string ego_video_id(std::size_t k);
std::string viewer_id(std::size_t k);

}  // namespace egotop
