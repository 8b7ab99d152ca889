#include "egotop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "egotop/io.hpp"

namespace egotop {

namespace {

// Independent, reproducible random streams derived from one seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

enum Stream : std::uint64_t { kWorld = 1, kAgents = 2, kRoles = 3, kEgoNoise = 100 };

}  // namespace

std::string ego_video_id(std::size_t k) { return "ego_" + std::to_string(k); }
std::string viewer_id(std::size_t k) { return "v" + std::to_string(k); }

void ScenarioConfig::validate() const {
    if (n_top == 0) throw InvalidInput("scenario needs at least one viewer");
    if (n_ego == 0 || n_ego > n_top) throw InvalidInput("n_ego must lie in [1, n_top]");
    if (duration_frames < 2) throw InvalidInput("scenario needs at least two frames");
    if (!(frame_rate > 0.0)) throw InvalidInput("frame rate must be positive");
    if (!true_delays.empty() && true_delays.size() != n_ego) throw InvalidInput("one true delay per ego video");
    if (!(descriptor_noise_sigma >= 0.0)) throw InvalidInput("noise sigma must be non-negative");
    if (!(count_noise_rate >= 0.0 && count_noise_rate <= 1.0)) throw InvalidInput("count noise rate must lie in [0, 1]");
    if (!(arena_width > 0.0 && arena_height > 0.0)) throw InvalidInput("arena must have positive size");
    if (n_landmarks == 0 || descriptor_dim == 0) throw InvalidInput("world needs landmarks with appearance");
    if (!(half_angle_deg > 0.0 && half_angle_deg < 90.0)) throw InvalidInput("half angle must lie in (0, 90)");
    if (!(speed_min > 0.0) || speed_max < speed_min || !(turn_rate_deg > 0.0))
        throw InfeasibleMotion("speed range must satisfy 0 < min <= max and the turn rate must be positive");
    const double room = std::min(arena_width, arena_height);
    if (room < 2.0 || room < 2.0 * speed_max)
        throw InfeasibleMotion("arena too small for the speed range (needs two seconds of travel per side)");
}

World make_world(const ScenarioConfig& cfg) {
    auto rng = stream(cfg.seed, kWorld);
    World w;
    w.width = cfg.arena_width;
    w.height = cfg.arena_height;
    w.seed = cfg.seed;
    std::uniform_real_distribution<double> ux(-cfg.landmark_margin, cfg.arena_width + cfg.landmark_margin);
    std::uniform_real_distribution<double> uy(-cfg.landmark_margin, cfg.arena_height + cfg.landmark_margin);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t n = 0; n < cfg.n_landmarks; ++n) {
        Landmark lm;
        lm.position = Point2(ux(rng), uy(rng));
        lm.appearance.resize(static_cast<Eigen::Index>(cfg.descriptor_dim));
        for (Eigen::Index d = 0; d < lm.appearance.size(); ++d) lm.appearance(d) = gauss(rng);
        lm.appearance.normalize();
        w.landmarks.push_back(std::move(lm));
    }
    return w;
}

std::vector<Trajectory> simulate_agents(const ScenarioConfig& cfg, std::int64_t first_frame, std::size_t frames) {
    cfg.validate();
    auto rng = stream(cfg.seed, kAgents);
    auto roles = stream(cfg.seed, kRoles);
    std::vector<std::size_t> order(cfg.n_top);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), roles);
    std::vector<char> recording(cfg.n_top, 0);
    for (std::size_t k = 0; k < cfg.n_ego; ++k) recording[order[k]] = 1;

    const double dt = 1.0 / cfg.frame_rate;
    const double max_turn = cfg.turn_rate_deg * std::numbers::pi / 180.0 * dt;
    const double margin = 0.5;
    std::uniform_real_distribution<double> wx(margin, cfg.arena_width - margin);
    std::uniform_real_distribution<double> wy(margin, cfg.arena_height - margin);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);

    std::vector<Trajectory> out;
    for (std::size_t a = 0; a < cfg.n_top; ++a) {
        const bool loiter = !recording[a] && cfg.intruders == IntruderPolicy::Loiter;
        const double vmin = loiter ? 0.2 : cfg.speed_min;
        const double vmax = loiter ? std::max(0.2, 0.5 * cfg.speed_min) : cfg.speed_max;
        std::uniform_real_distribution<double> speed_draw(vmin, vmax);

        std::vector<Point2> fixed_wps;
        for (std::size_t w = 0; w < cfg.waypoint_count; ++w) fixed_wps.emplace_back(wx(rng), wy(rng));
        std::size_t wp_index = 0;
        auto next_waypoint = [&]() -> Point2 {
            if (fixed_wps.empty()) return Point2(wx(rng), wy(rng));
            wp_index = (wp_index + 1) % fixed_wps.size();
            return fixed_wps[wp_index];
        };

        Point2 pos(wx(rng), wy(rng));
        double heading = angle(rng);
        Point2 wp = fixed_wps.empty() ? Point2(wx(rng), wy(rng)) : fixed_wps[0];
        double speed = speed_draw(rng);
        const double reach = std::max(0.5, 1.5 * vmax / (cfg.turn_rate_deg * std::numbers::pi / 180.0));
        int leg_frames = 0;
        const int leg_limit = static_cast<int>(20.0 * cfg.frame_rate);

        // Walk through the frames before first_frame too, so a path does not depend on the window.
        const std::int64_t warmup = std::min<std::int64_t>(first_frame, 0);
        Trajectory traj{viewer_id(a), {}, cfg.frame_rate};
        traj.positions.reserve(frames);
        for (std::int64_t f = warmup; f < first_frame + static_cast<std::int64_t>(frames); ++f) {
            if (f >= first_frame) traj.positions.push_back(pos);
            if ((wp - pos).norm() < reach || ++leg_frames > leg_limit) {
                wp = next_waypoint();
                speed = speed_draw(rng);
                leg_frames = 0;
            }
            const Point2 to = wp - pos;
            const double turn = std::clamp(wrap_angle(std::atan2(to.y(), to.x()) - heading), -max_turn, max_turn);
            heading = wrap_angle(heading + turn);
            pos += speed * dt * Point2(std::cos(heading), std::sin(heading));
            pos.x() = std::clamp(pos.x(), 0.0, cfg.arena_width);
            pos.y() = std::clamp(pos.y(), 0.0, cfg.arena_height);
        }
        out.push_back(std::move(traj));
    }
    return out;
}

Eigen::VectorXd render_view(const World& world, const FovCone& cone, std::size_t dim) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (const auto& lm : world.landmarks) {
        if (!cone.contains(lm.position)) continue;
        v += lm.appearance / (1.0 + (lm.position - cone.apex).norm());
    }
    const double n = v.norm();
    if (n > 0.0) v /= n;
    return v;
}

EgoVideo render_ego(const World& world, std::span<const Trajectory> agents, std::size_t owner, std::size_t start,
                    std::size_t frames, const ScenarioConfig& cfg, const std::string& video_id, std::mt19937_64& rng) {
    GeometryConfig geo;
    geo.half_angle_deg = cfg.half_angle_deg;
    geo.range_m = cfg.range();
    const auto heads = headings(agents[owner], geo);

    EgoVideo ego;
    ego.video_id = video_id;
    ego.frame_rate = cfg.frame_rate;
    ego.descriptors.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(cfg.descriptor_dim));
    ego.counts.resize(static_cast<Eigen::Index>(frames));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point2> others;
    for (std::size_t r = 0; r < frames; ++r) {
        const std::size_t t = start + r;
        const FovCone cone = cone_at(agents[owner], heads, t, geo);
        Eigen::VectorXd d = render_view(world, cone, cfg.descriptor_dim);
        if (cfg.descriptor_noise_sigma > 0.0) {
            for (Eigen::Index c = 0; c < d.size(); ++c) d(c) += cfg.descriptor_noise_sigma * gauss(rng);
            const double n = d.norm();
            if (n > 0.0) d /= n;
        }
        ego.descriptors.row(static_cast<Eigen::Index>(r)) = d.transpose();

        others.clear();
        for (std::size_t a = 0; a < agents.size(); ++a)
            if (a != owner) others.push_back(agents[a].positions[t]);
        double count = static_cast<double>(count_in_cone(cone, others));
        if (cfg.count_noise_rate > 0.0 && unit(rng) < cfg.count_noise_rate)
            count = std::max(0.0, count + (unit(rng) < 0.5 ? -1.0 : 1.0));
        ego.counts(static_cast<Eigen::Index>(r)) = count;
    }
    return ego;
}

Scenario generate(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario s;
    s.config = cfg;
    s.world = make_world(cfg);
    s.delays = cfg.true_delays.empty() ? std::vector<int>(cfg.n_ego, 0) : cfg.true_delays;

    int pad = 0;
    for (int d : s.delays) pad = std::max(pad, std::abs(d));
    const std::size_t T = cfg.duration_frames;
    // Agents are simulated beyond the top-view window so delayed ego streams have content.
    const auto agents = simulate_agents(cfg, -pad, T + 2 * static_cast<std::size_t>(pad) + 1);

    auto roles = stream(cfg.seed, kRoles);
    std::vector<std::size_t> order(cfg.n_top);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), roles);
    s.truth.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cfg.n_ego));

    for (const auto& a : agents) {
        Trajectory t{a.viewer_id, {}, a.frame_rate};
        t.positions.assign(a.positions.begin() + pad, a.positions.begin() + pad + static_cast<std::ptrdiff_t>(T));
        s.trajectories.push_back(std::move(t));
    }
    for (std::size_t k = 0; k < cfg.n_ego; ++k) {
        auto rng = stream(cfg.seed, kEgoNoise + k);
        const auto start = static_cast<std::size_t>(pad + s.delays[k]);
        s.ego.push_back(render_ego(s.world, agents, s.truth[k], start, T, cfg, ego_video_id(k), rng));
    }
    return s;
}

void emit(const Scenario& scenario, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_trajectories_csv(dir / "topview.csv", scenario.trajectories);
    GroundTruth truth;
    for (std::size_t k = 0; k < scenario.ego.size(); ++k) {
        const auto& e = scenario.ego[k];
        write_descriptors(dir / (e.video_id + ".desc"), e.descriptors, DescriptorMeta{e.video_id, e.frame_rate, DescriptorFormat::Csv});
        write_counts_csv(dir / (e.video_id + ".counts.csv"), e.counts);
        truth.assignment.emplace_back(e.video_id, scenario.trajectories[scenario.truth[k]].viewer_id);
        truth.delays.push_back(scenario.delays[k]);
    }
    truth.config = scenario_config_to_json(scenario.config);
    write_truth_json(dir / "truth.json", truth);
    write_json(dir / "config.json", scenario_config_to_json(scenario.config));
}

}  // namespace egotop
