#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "egotop/errors.hpp"
#include "egotop/geometry.hpp"

namespace egotop {

struct FeatureConfig {
    double gamma = 0.5;              // descriptor similarity decay
    double alpha = 0.9;              // weight of the 2D node term against the count term
    double min_box_fraction = 0.04;  // detections shorter than this fraction of frame height are dropped
    double resample_rate = 10.0;     // frames per second every stream is brought to

    void validate() const;
};

enum class ViewKind { Top, Ego };

/// Graph over the viewers of one view. Node i carries a T_i x T_i self-similarity matrix
/// (top: cone IOU, ego: descriptor similarity) and a z-normalised count series; each
/// unordered pair carries the cross-similarity matrix between the two nodes' frames.
///
/// Matrices are immutable and shared, so subsets and copies are cheap.
class ViewGraph {
public:
    using MatrixPtr = std::shared_ptr<const Eigen::MatrixXd>;

    ViewGraph() = default;
    ViewGraph(ViewKind kind, std::vector<std::string> ids, std::vector<MatrixPtr> node_sim,
              std::vector<Eigen::VectorXd> counts, std::vector<MatrixPtr> edges_upper);

    ViewKind kind() const { return kind_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& node_ids() const { return ids_; }
    std::size_t frames(std::size_t node) const { return static_cast<std::size_t>(node_sim_[node]->rows()); }

    const Eigen::MatrixXd& node(std::size_t i) const { return *node_sim_[i]; }
    const MatrixPtr& node_ptr(std::size_t i) const { return node_sim_[i]; }
    const Eigen::VectorXd& counts(std::size_t i) const { return counts_[i]; }

    /// Edge matrix for i < j, rows indexed by i's frames.
    const Eigen::MatrixXd& edge_upper(std::size_t i, std::size_t j) const { return *edge_ptr(i, j); }
    const MatrixPtr& edge_ptr(std::size_t i, std::size_t j) const;
    /// Edge matrix for any i != j (a transposed copy when i > j); equals node(i) when i == j.
    Eigen::MatrixXd edge(std::size_t i, std::size_t j) const;

    /// Graph restricted to the given nodes, in the given order.
    ViewGraph subset(std::span<const std::size_t> nodes) const;
    /// Graph whose streams keep only their first `frames` frames.
    ViewGraph truncated(std::size_t frames) const;

private:
    std::size_t pair_index(std::size_t i, std::size_t j) const;

    ViewKind kind_ = ViewKind::Top;
    std::vector<std::string> ids_;
    std::vector<MatrixPtr> node_sim_;
    std::vector<Eigen::VectorXd> counts_;
    std::vector<MatrixPtr> edges_;  // upper triangle, row-major over (i < j)
};

/// exp(-gamma * |d1 - d2|).
template <class DA, class DB>
double gist_similarity(const Eigen::MatrixBase<DA>& d1, const Eigen::MatrixBase<DB>& d2, double gamma) {
    if (d1.size() != d2.size()) throw DimensionMismatch("descriptor dimensions differ");
    return std::exp(-gamma * (d1 - d2).norm());
}

/// One egocentric recording as handed to the graph builder.
struct EgoVideo {
    std::string video_id;
    Eigen::MatrixXd descriptors;  // rows = frames
    Eigen::VectorXd counts;       // one per frame
    double frame_rate = 10.0;
};

ViewGraph build_top_graph(std::span<const Trajectory> trajectories, const GeometryConfig& geo,
                          const FeatureConfig& cfg);

ViewGraph build_ego_graph(std::span<const EgoVideo> videos, const FeatureConfig& cfg);

struct DetectionRecord {
    std::size_t frame = 0;
    double score = 0.0;
    double box_height_fraction = 0.0;
};

/// Per-frame soft people count from detector output: small boxes are dropped, scores are
/// min-max rescaled over the whole video, then summed per frame.
Eigen::VectorXd ingest_detections(std::span<const DetectionRecord> rows, std::size_t frame_count,
                                  const FeatureConfig& cfg);

/// Source frame for each output frame under nearest-frame resampling.
std::vector<std::size_t> resample_indices(std::size_t length, double from_rate, double to_rate);

Eigen::VectorXd resample(const Eigen::VectorXd& series, double from_rate, double to_rate);
/// Resamples the frame axis (rows) only.
Eigen::MatrixXd resample_rows(const Eigen::MatrixXd& m, double from_rate, double to_rate);
/// Resamples both axes of a frame-by-frame similarity matrix.
Eigen::MatrixXd resample(const Eigen::MatrixXd& m, double from_rate, double to_rate);
Trajectory resample(const Trajectory& traj, double to_rate);

/// Zero mean, unit (population) variance; a constant series maps to zeros.
Eigen::VectorXd z_normalize(const Eigen::VectorXd& v);

/// Rows scaled to unit length; zero rows stay zero.
Eigen::MatrixXd l2_normalize_rows(const Eigen::MatrixXd& m);

}  // namespace egotop
