#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "egotop/errors.hpp"

namespace egotop {

using Point2 = Eigen::Vector2d;

/// Per-frame ground-plane positions of one viewer seen from the top view.
struct Trajectory {
    std::string viewer_id;
    std::vector<Point2> positions;  // metres, one per frame
    double frame_rate = 10.0;

    std::size_t frames() const { return positions.size(); }

    /// Throws InvalidInput when empty, non-finite or with a bad frame rate.
    void validate() const;
};

/// Circular sector approximating what a body-worn camera sees, in top-view coordinates.
struct FovCone {
    Point2 apex = Point2::Zero();
    double heading = 0.0;     // radians
    double half_angle = 0.0;  // radians, in (0, pi/2)
    double range = 0.0;       // metres

    bool contains(const Point2& p) const;
    double area() const { return half_angle * range * range; }
    bool operator==(const FovCone&) const = default;
};

struct GeometryConfig {
    double half_angle_deg = 30.0;
    /// Cone range in metres. Unset means "diameter of the scene", resolved by the caller.
    std::optional<double> range_m;
    double grid_resolution_m = 0.1;
    /// Displacement per frame below which the heading is carried forward.
    double speed_epsilon = 1e-3;

    double half_angle() const;
    /// The configured range, throwing InvalidInput if unresolved.
    double range() const;
    void validate() const;
};

/// Diagonal of the bounding box covering every trajectory.
double scene_diameter(std::span<const Trajectory> trajectories);

/// Copy of `cfg` whose range is the scene diameter if it was unset.
GeometryConfig resolve_range(GeometryConfig cfg, std::span<const Trajectory> trajectories);

/// Heading per frame from the speed vector. Pauses carry the last heading forward; leading
/// pauses take the first defined heading.
std::vector<double> headings(const Trajectory& traj, const GeometryConfig& cfg);

FovCone cone_at(const Trajectory& traj, std::size_t frame, const GeometryConfig& cfg);

/// Same as above with headings already computed for `traj`.
FovCone cone_at(const Trajectory& traj, std::span<const double> heads, std::size_t frame,
                const GeometryConfig& cfg);

/// Intersection over union of two cones, by cell count on a grid of pitch
/// `cfg.grid_resolution_m` anchored at the world origin.
double cone_iou(const FovCone& a, const FovCone& b, const GeometryConfig& cfg);

/// Number of points inside the sector (distance <= range, angular deviation <= half angle).
std::size_t count_in_cone(const FovCone& cone, std::span<const Point2> points);

/// Cells of one cone on the shared grid. A sector narrower than pi is convex, so each grid
/// row intersects it in a single run of cells [first, last].
struct ConeRaster {
    int row0 = 0;
    std::vector<std::pair<int, int>> spans;  // empty rows have first > last
    std::int64_t cells = 0;
};

ConeRaster rasterize(const FovCone& cone, double resolution);

/// IOU of two rasters built with the same resolution.
double raster_iou(const ConeRaster& a, const ConeRaster& b);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace egotop
