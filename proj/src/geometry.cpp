#include "egotop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace egotop {

void Trajectory::validate() const {
    if (positions.empty()) throw InvalidInput("trajectory '" + viewer_id + "' has no positions");
    if (!(frame_rate > 0.0) || !std::isfinite(frame_rate))
        throw InvalidInput("trajectory '" + viewer_id + "' has a non-positive frame rate");
    for (const auto& p : positions)
        if (!p.allFinite()) throw InvalidInput("trajectory '" + viewer_id + "' has non-finite positions");
}

double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

bool FovCone::contains(const Point2& p) const {
    const Point2 v = p - apex;
    const double dist = v.norm();
    if (dist > range) return false;
    if (dist == 0.0) return true;
    return std::abs(wrap_angle(std::atan2(v.y(), v.x()) - heading)) <= half_angle;
}

double GeometryConfig::half_angle() const { return half_angle_deg * std::numbers::pi / 180.0; }

double GeometryConfig::range() const {
    if (!range_m) throw InvalidInput("geometry range is unresolved");
    return *range_m;
}

void GeometryConfig::validate() const {
    if (!(half_angle_deg > 0.0 && half_angle_deg < 90.0))
        throw InvalidInput("half angle must lie in (0, 90) degrees");
    if (range_m && !(*range_m > 0.0)) throw InvalidInput("cone range must be positive");
    if (!(grid_resolution_m > 0.0)) throw InvalidInput("grid resolution must be positive");
    if (!(speed_epsilon > 0.0)) throw InvalidInput("speed epsilon must be positive");
}

double scene_diameter(std::span<const Trajectory> trajectories) {
    Point2 lo = Point2::Constant(std::numeric_limits<double>::infinity());
    Point2 hi = -lo;
    for (const auto& t : trajectories)
        for (const auto& p : t.positions) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
    if (!lo.allFinite()) throw InvalidInput("no positions to measure the scene");
    return std::max((hi - lo).norm(), 1e-6);
}

GeometryConfig resolve_range(GeometryConfig cfg, std::span<const Trajectory> trajectories) {
    if (!cfg.range_m) cfg.range_m = scene_diameter(trajectories);
    return cfg;
}

std::vector<double> headings(const Trajectory& traj, const GeometryConfig& cfg) {
    traj.validate();
    const std::size_t n = traj.frames();
    std::vector<double> out(n, 0.0);
    std::optional<double> last;
    std::size_t first_defined = n;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const Point2 step = traj.positions[t + 1] - traj.positions[t];
        if (step.norm() >= cfg.speed_epsilon) {
            last = std::atan2(step.y(), step.x());
            if (first_defined == n) first_defined = t;
        }
        if (last) out[t] = *last;
    }
    if (first_defined == n)
        throw AllStationary("trajectory '" + traj.viewer_id + "' never moves");
    for (std::size_t t = 0; t < first_defined; ++t) out[t] = out[first_defined];
    if (n >= 2) out[n - 1] = out[n - 2];
    return out;
}

FovCone cone_at(const Trajectory& traj, std::span<const double> heads, std::size_t frame,
                const GeometryConfig& cfg) {
    if (frame >= traj.frames()) throw InvalidInput("frame index past the end of the trajectory");
    return FovCone{traj.positions[frame], heads[frame], cfg.half_angle(), cfg.range()};
}

FovCone cone_at(const Trajectory& traj, std::size_t frame, const GeometryConfig& cfg) {
    const auto heads = headings(traj, cfg);
    return cone_at(traj, heads, frame, cfg);
}

namespace {

// Restricts [lo, hi] to {x : a * x >= b}.
void clip_halfline(double a, double b, double& lo, double& hi) {
    if (a > 0.0) {
        lo = std::max(lo, b / a);
    } else if (a < 0.0) {
        hi = std::min(hi, b / a);
    } else if (b > 0.0) {
        lo = 1.0;
        hi = 0.0;
    }
}

}  // namespace

ConeRaster rasterize(const FovCone& cone, double resolution) {
    ConeRaster r;
    const double ax = cone.apex.x();
    const double ay = cone.apex.y();
    const double R = cone.range;
    // Boundary rays of the wedge.
    const double r1x = std::cos(cone.heading - cone.half_angle);
    const double r1y = std::sin(cone.heading - cone.half_angle);
    const double r2x = std::cos(cone.heading + cone.half_angle);
    const double r2y = std::sin(cone.heading + cone.half_angle);

    // Cell (ix, iy) has its centre at ((ix + 0.5) * res, (iy + 0.5) * res).
    const int row_lo = static_cast<int>(std::ceil((ay - R) / resolution - 0.5));
    const int row_hi = static_cast<int>(std::floor((ay + R) / resolution - 0.5));
    r.row0 = row_lo;
    if (row_hi < row_lo) return r;
    r.spans.reserve(static_cast<std::size_t>(row_hi - row_lo + 1));
    for (int iy = row_lo; iy <= row_hi; ++iy) {
        const double vy = (iy + 0.5) * resolution - ay;
        const double h2 = R * R - vy * vy;
        double lo = 1.0, hi = 0.0;
        if (h2 >= 0.0) {
            const double h = std::sqrt(h2);
            lo = -h;
            hi = h;
            // cross(r1, v) >= 0  <=>  -r1y * vx >= -r1x * vy
            clip_halfline(-r1y, -r1x * vy, lo, hi);
            // cross(v, r2) >= 0  <=>   r2y * vx >=  r2x * vy
            clip_halfline(r2y, r2x * vy, lo, hi);
        }
        int first = 1, last = 0;
        if (lo <= hi) {
            first = static_cast<int>(std::ceil((ax + lo) / resolution - 0.5));
            last = static_cast<int>(std::floor((ax + hi) / resolution - 0.5));
        }
        if (first <= last) r.cells += last - first + 1;
        r.spans.emplace_back(first, last);
    }
    return r;
}

double raster_iou(const ConeRaster& a, const ConeRaster& b) {
    const int a_end = a.row0 + static_cast<int>(a.spans.size());
    const int b_end = b.row0 + static_cast<int>(b.spans.size());
    const int lo = std::max(a.row0, b.row0);
    const int hi = std::min(a_end, b_end);
    std::int64_t inter = 0;
    for (int row = lo; row < hi; ++row) {
        const auto& sa = a.spans[static_cast<std::size_t>(row - a.row0)];
        const auto& sb = b.spans[static_cast<std::size_t>(row - b.row0)];
        const int first = std::max(sa.first, sb.first);
        const int last = std::min(sa.second, sb.second);
        if (first <= last) inter += last - first + 1;
    }
    const std::int64_t uni = a.cells + b.cells - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double cone_iou(const FovCone& a, const FovCone& b, const GeometryConfig& cfg) {
    const ConeRaster ra = rasterize(a, cfg.grid_resolution_m);
    if (a == b) return ra.cells > 0 ? 1.0 : 0.0;
    return raster_iou(ra, rasterize(b, cfg.grid_resolution_m));
}

std::size_t count_in_cone(const FovCone& cone, std::span<const Point2> points) {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [&](const Point2& p) { return cone.contains(p); }));
}

}  // namespace egotop
