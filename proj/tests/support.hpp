#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "egotop/eval.hpp"
#include "egotop/simulator.hpp"

namespace egotop::test {

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    return random_matrix(n, 1, rng);
}

inline Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
    const Eigen::MatrixXd m = random_matrix(n, n, rng);
    return 0.5 * (m + m.transpose());
}

/// Straight walk from `start` with constant per-frame step.
inline Trajectory line(const std::string& id, Point2 start, Point2 step, std::size_t frames) {
    Trajectory t{id, {}, 10.0};
    for (std::size_t f = 0; f < frames; ++f) t.positions.push_back(start + static_cast<double>(f) * step);
    return t;
}

/// Smooth random walk inside [0, 10]^2.
inline Trajectory wander(const std::string& id, std::size_t frames, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Trajectory t{id, {}, 10.0};
    Point2 p(5.0 + 2.0 * u(rng), 5.0 + 2.0 * u(rng));
    double h = 3.0 * u(rng);
    for (std::size_t f = 0; f < frames; ++f) {
        t.positions.push_back(p);
        h += 0.15 * u(rng);
        p += 0.1 * Point2(std::cos(h), std::sin(h));
        if (p.x() < 1 || p.x() > 9 || p.y() < 1 || p.y() > 9) h += 3.14159 / 2;
    }
    return t;
}

inline ScenarioConfig small_scene(std::uint64_t seed, std::size_t n_top = 4, std::size_t n_ego = 4,
                                  std::size_t frames = 200) {
    ScenarioConfig c;
    c.seed = seed;
    c.n_top = n_top;
    c.n_ego = n_ego;
    c.duration_frames = frames;
    return c;
}

struct Built {
    Scenario scenario;
    SceneGraphs graphs;
};

inline Built build(const ScenarioConfig& c, const PipelineConfig& p = {}) {
    Built b{generate(c), {}};
    b.graphs = build_graphs(as_loaded(b.scenario), p);
    return b;
}

}  // namespace egotop::test
