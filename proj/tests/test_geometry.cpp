#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>

#include "egotop/geometry.hpp"
#include "support.hpp"

using namespace egotop;
using egotop::test::line;
using egotop::test::wander;

namespace {

GeometryConfig geo(double range = 5.0) {
    GeometryConfig g;
    g.range_m = range;
    return g;
}

// Containment written out independently of FovCone::contains.
bool inside(const FovCone& c, const Point2& p) {
    const double dx = p.x() - c.apex.x(), dy = p.y() - c.apex.y();
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d > c.range) return false;
    if (d == 0.0) return true;
    double diff = std::fmod(std::atan2(dy, dx) - c.heading, 2 * std::numbers::pi);
    if (diff > std::numbers::pi) diff -= 2 * std::numbers::pi;
    if (diff < -std::numbers::pi) diff += 2 * std::numbers::pi;
    return std::abs(diff) <= c.half_angle;
}

// Brute-force IOU by cell centres on a grid of the given pitch.
double fine_iou(const FovCone& a, const FovCone& b, double res) {
    const double x0 = std::min(a.apex.x(), b.apex.x()) - a.range - b.range;
    const double x1 = std::max(a.apex.x(), b.apex.x()) + a.range + b.range;
    const double y0 = std::min(a.apex.y(), b.apex.y()) - a.range - b.range;
    const double y1 = std::max(a.apex.y(), b.apex.y()) + a.range + b.range;
    long both = 0, either = 0;
    for (double x = x0 + res / 2; x < x1; x += res)
        for (double y = y0 + res / 2; y < y1; y += res) {
            const bool ia = inside(a, {x, y}), ib = inside(b, {x, y});
            both += ia && ib;
            either += ia || ib;
        }
    return either ? static_cast<double>(both) / either : 0.0;
}

FovCone cone(Point2 apex, double heading, double range = 5.0, double half_deg = 30.0) {
    return FovCone{apex, heading, half_deg * std::numbers::pi / 180.0, range};
}

}  // namespace

TEST_CASE("headings follow the motion direction") {
    const auto t = line("a", {0, 0}, {0.1, 0}, 20);
    for (double h : headings(t, geo())) CHECK(h == doctest::Approx(0.0));
}

TEST_CASE("pauses carry the heading forward and leading pauses are back-filled") {
    Trajectory t{"a", {}, 10.0};
    for (int f = 0; f < 3; ++f) t.positions.emplace_back(0, 0);           // standing
    for (int f = 1; f <= 5; ++f) t.positions.emplace_back(0, 0.1 * f);    // walking +y
    for (int f = 0; f < 4; ++f) t.positions.emplace_back(0, 0.5);         // paused
    for (int f = 1; f <= 5; ++f) t.positions.emplace_back(-0.1 * f, 0.5); // walking -x
    const auto h = headings(t, geo());
    REQUIRE(h.size() == t.frames());
    CHECK(h[0] == doctest::Approx(std::numbers::pi / 2));
    CHECK(h[1] == doctest::Approx(std::numbers::pi / 2));
    CHECK(h[9] == doctest::Approx(std::numbers::pi / 2));
    CHECK(h[10] == doctest::Approx(std::numbers::pi / 2));
    CHECK(std::abs(h[14]) == doctest::Approx(std::numbers::pi));
    CHECK(h.back() == h[h.size() - 2]);
}

TEST_CASE("a viewer that never moves has no heading") {
    Trajectory t{"a", std::vector<Point2>(10, Point2(1, 1)), 10.0};
    CHECK_THROWS_AS(headings(t, geo()), AllStationary);
}

TEST_CASE("headings on a quarter circle match the analytic tangent") {
    Trajectory t{"arc", {}, 10.0};
    const double R = 4.0;
    const int n = 100;
    for (int f = 0; f < n; ++f) {
        const double phi = (std::numbers::pi / 2) * f / (n - 1);
        t.positions.emplace_back(R * std::cos(phi), R * std::sin(phi));
    }
    const auto h = headings(t, geo());
    for (int f = 0; f < n; ++f) {
        const double phi = (std::numbers::pi / 2) * f / (n - 1);
        CHECK(std::abs(wrap_angle(h[f] - (phi + std::numbers::pi / 2))) < 0.05);
    }
}

TEST_CASE("reversing a trajectory turns every heading around") {
    std::mt19937_64 rng(7);
    const auto t = wander("w", 120, rng);
    Trajectory rev = t;
    std::reverse(rev.positions.begin(), rev.positions.end());
    const auto h = headings(t, geo());
    const auto hr = headings(rev, geo());
    const std::size_t n = t.frames();
    for (std::size_t f = 0; f + 1 < n; ++f)
        CHECK(std::abs(wrap_angle(hr[f] - (h[n - 2 - f] + std::numbers::pi))) < 1e-12);
}

TEST_CASE("cone_at places the cone at the viewer") {
    const auto t = line("a", {1, 2}, {0.1, 0}, 10);
    const auto c = cone_at(t, 0, geo());
    CHECK(c.apex == Point2(1, 2));
    CHECK(c.heading == doctest::Approx(0.0));
    CHECK(2 * c.half_angle == doctest::Approx(std::numbers::pi / 3));  // 60 degrees wide
    CHECK(c.range == 5.0);
    CHECK_THROWS_AS(cone_at(t, 0, GeometryConfig{}), InvalidInput);
}

TEST_CASE("rasterised cone area agrees with the sector area") {
    std::mt19937_64 rng(11);
    const auto t = wander("w", 50, rng);
    const auto g = geo(3.0);
    const double res = g.grid_resolution_m;
    for (std::size_t f = 0; f < t.frames(); f += 7) {
        const auto c = cone_at(t, f, g);
        const double sector = c.half_angle * c.range * c.range;
        const double raster = static_cast<double>(rasterize(c, res).cells) * res * res;
        const double perimeter = 2 * c.range + 2 * c.half_angle * c.range;
        CHECK(std::abs(raster - sector) <= perimeter * res);
        CHECK(c.area() == doctest::Approx(sector));
    }
}

TEST_CASE("cone IOU of identical and far-apart cones") {
    const auto g = geo();
    const auto a = cone({1, 1}, 0.3);
    CHECK(cone_iou(a, a, g) == 1.0);
    CHECK(cone_iou(a, cone({1 + 15.0, 1}, 0.3), g) == 0.0);
}

TEST_CASE("cone IOU matches a ten times finer grid") {
    const auto g = geo();
    const auto a = cone({0.37, -1.21}, 0.2);
    const auto b = cone({0.37, -1.21}, 0.2 + std::numbers::pi / 6);
    const double oracle = fine_iou(a, b, g.grid_resolution_m / 10);
    CHECK(std::abs(cone_iou(a, b, g) - oracle) <= 0.02);
    CHECK(oracle > 0.2);
}

TEST_CASE("cone IOU is symmetric and rigid-motion invariant") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto g = geo();
    for (int trial = 0; trial < 40; ++trial) {
        const auto a = cone({2 * u(rng), 2 * u(rng)}, 3 * u(rng));
        const auto b = cone({2 * u(rng), 2 * u(rng)}, 3 * u(rng));
        CHECK(cone_iou(a, b, g) == cone_iou(b, a, g));

        const double rot = 3 * u(rng);
        const Point2 shift(10 * u(rng), 10 * u(rng));
        const Eigen::Rotation2Dd R(rot);
        auto move = [&](FovCone c) {
            c.apex = R * c.apex + shift;
            c.heading = wrap_angle(c.heading + rot);
            return c;
        };
        CHECK(std::abs(cone_iou(move(a), move(b), g) - cone_iou(a, b, g)) < 2 * 0.02);
    }
}

TEST_CASE("count_in_cone") {
    const auto c = cone({0, 0}, 0.0);
    CHECK(count_in_cone(c, std::vector<Point2>{}) == 0);
    CHECK(count_in_cone(c, std::vector<Point2>{{2.5, 0}}) == 1);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto k = cone({u(rng) / 3, u(rng) / 3}, u(rng));
        std::vector<Point2> pts;
        for (int n = 0; n < 50; ++n) pts.emplace_back(u(rng), u(rng));
        std::size_t expect = 0;
        for (const auto& p : pts) expect += inside(k, p);
        CHECK(count_in_cone(k, pts) == expect);
    }
}

TEST_CASE("scene diameter is the bounding-box diagonal") {
    std::vector<Trajectory> ts{line("a", {0, 0}, {0.1, 0}, 31), line("b", {0, 4}, {0, 0}, 31)};
    CHECK(scene_diameter(ts) == doctest::Approx(5.0));
    CHECK(resolve_range(GeometryConfig{}, ts).range() == doctest::Approx(5.0));
}

TEST_CASE("invalid configurations are rejected") {
    GeometryConfig g;
    g.half_angle_deg = 90;
    CHECK_THROWS_AS(g.validate(), InvalidInput);
    g = GeometryConfig{};
    g.grid_resolution_m = 0;
    CHECK_THROWS_AS(g.validate(), InvalidInput);
    Trajectory empty{"e", {}, 10.0};
    CHECK_THROWS_AS(empty.validate(), InvalidInput);
}
