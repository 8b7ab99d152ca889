#include "egotop/features.hpp"

#include <algorithm>
#include <cmath>

namespace egotop {

void FeatureConfig::validate() const {
    if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
    if (!(min_box_fraction > 0.0 && min_box_fraction < 1.0))
        throw InvalidInput("min_box_fraction must lie in (0, 1)");
    if (!(resample_rate > 0.0)) throw InvalidInput("resample rate must be positive");
}

ViewGraph::ViewGraph(ViewKind kind, std::vector<std::string> ids, std::vector<MatrixPtr> node_sim,
                     std::vector<Eigen::VectorXd> counts, std::vector<MatrixPtr> edges_upper)
    : kind_(kind), ids_(std::move(ids)), node_sim_(std::move(node_sim)), counts_(std::move(counts)),
      edges_(std::move(edges_upper)) {
    const std::size_t n = ids_.size();
    if (n == 0) throw InvalidInput("a view graph needs at least one node");
    if (node_sim_.size() != n || counts_.size() != n || edges_.size() != n * (n - 1) / 2)
        throw InvalidInput("view graph parts disagree on the node count");
}

std::size_t ViewGraph::pair_index(std::size_t i, std::size_t j) const {
    // Row-major enumeration of (i, j) with i < j.
    const std::size_t n = size();
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

const ViewGraph::MatrixPtr& ViewGraph::edge_ptr(std::size_t i, std::size_t j) const {
    if (i >= j || j >= size()) throw InvalidInput("edge_upper needs i < j < size()");
    return edges_[pair_index(i, j)];
}

Eigen::MatrixXd ViewGraph::edge(std::size_t i, std::size_t j) const {
    if (i == j) return node(i);
    if (i < j) return edge_upper(i, j);
    return edge_upper(j, i).transpose();
}

ViewGraph ViewGraph::subset(std::span<const std::size_t> nodes) const {
    std::vector<std::string> ids;
    std::vector<MatrixPtr> sims;
    std::vector<Eigen::VectorXd> counts;
    std::vector<MatrixPtr> edges;
    for (std::size_t a : nodes) {
        if (a >= size()) throw InvalidInput("subset index out of range");
        ids.push_back(ids_[a]);
        sims.push_back(node_sim_[a]);
        counts.push_back(counts_[a]);
    }
    for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b) {
            const std::size_t i = nodes[a], j = nodes[b];
            if (i == j) throw InvalidInput("subset repeats a node");
            if (i < j)
                edges.push_back(edge_ptr(i, j));
            else
                edges.push_back(std::make_shared<const Eigen::MatrixXd>(edge_upper(j, i).transpose()));
        }
    return ViewGraph(kind_, std::move(ids), std::move(sims), std::move(counts), std::move(edges));
}

ViewGraph ViewGraph::truncated(std::size_t frames) const {
    if (frames == 0) throw InvalidInput("cannot truncate to zero frames");
    auto cut = [frames](const Eigen::MatrixXd& m) {
        const auto r = std::min<Eigen::Index>(m.rows(), static_cast<Eigen::Index>(frames));
        const auto c = std::min<Eigen::Index>(m.cols(), static_cast<Eigen::Index>(frames));
        return std::make_shared<const Eigen::MatrixXd>(m.topLeftCorner(r, c));
    };
    std::vector<MatrixPtr> sims, edges;
    std::vector<Eigen::VectorXd> counts;
    for (std::size_t i = 0; i < size(); ++i) {
        sims.push_back(cut(node(i)));
        const auto n = std::min<Eigen::Index>(counts_[i].size(), static_cast<Eigen::Index>(frames));
        counts.push_back(z_normalize(counts_[i].head(n)));
    }
    for (const auto& e : edges_) edges.push_back(cut(*e));
    return ViewGraph(kind_, ids_, std::move(sims), std::move(counts), std::move(edges));
}

Eigen::VectorXd z_normalize(const Eigen::VectorXd& v) {
    if (v.size() == 0) return v;
    const double mean = v.mean();
    const Eigen::VectorXd c = v.array() - mean;
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(v.size()));
    if (!(sd > 1e-12)) return Eigen::VectorXd::Zero(v.size());
    return c / sd;
}

Eigen::MatrixXd l2_normalize_rows(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double n = out.row(r).norm();
        if (n > 0.0) out.row(r) /= n;
    }
    return out;
}

std::vector<std::size_t> resample_indices(std::size_t length, double from_rate, double to_rate) {
    if (!(from_rate > 0.0) || !(to_rate > 0.0)) throw InvalidInput("rates must be positive");
    if (length == 0) return {};
    if (from_rate == to_rate) {
        std::vector<std::size_t> id(length);
        for (std::size_t t = 0; t < length; ++t) id[t] = t;
        return id;
    }
    const auto out_len = static_cast<std::size_t>(
        std::max<long>(1, std::lround(static_cast<double>(length) * to_rate / from_rate)));
    std::vector<std::size_t> idx(out_len);
    for (std::size_t t = 0; t < out_len; ++t) {
        const long src = std::lround(static_cast<double>(t) * from_rate / to_rate);
        idx[t] = static_cast<std::size_t>(std::clamp<long>(src, 0, static_cast<long>(length) - 1));
    }
    return idx;
}

Eigen::VectorXd resample(const Eigen::VectorXd& series, double from_rate, double to_rate) {
    const auto idx = resample_indices(static_cast<std::size_t>(series.size()), from_rate, to_rate);
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t t = 0; t < idx.size(); ++t) out(static_cast<Eigen::Index>(t)) = series(static_cast<Eigen::Index>(idx[t]));
    return out;
}

Eigen::MatrixXd resample_rows(const Eigen::MatrixXd& m, double from_rate, double to_rate) {
    const auto idx = resample_indices(static_cast<std::size_t>(m.rows()), from_rate, to_rate);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t t = 0; t < idx.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = m.row(static_cast<Eigen::Index>(idx[t]));
    return out;
}

Eigen::MatrixXd resample(const Eigen::MatrixXd& m, double from_rate, double to_rate) {
    const auto ri = resample_indices(static_cast<std::size_t>(m.rows()), from_rate, to_rate);
    const auto ci = resample_indices(static_cast<std::size_t>(m.cols()), from_rate, to_rate);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ri.size()), static_cast<Eigen::Index>(ci.size()));
    for (std::size_t c = 0; c < ci.size(); ++c)
        for (std::size_t r = 0; r < ri.size(); ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m(static_cast<Eigen::Index>(ri[r]), static_cast<Eigen::Index>(ci[c]));
    return out;
}

Trajectory resample(const Trajectory& traj, double to_rate) {
    const auto idx = resample_indices(traj.frames(), traj.frame_rate, to_rate);
    Trajectory out{traj.viewer_id, {}, to_rate};
    out.positions.reserve(idx.size());
    for (std::size_t i : idx) out.positions.push_back(traj.positions[i]);
    return out;
}

ViewGraph build_top_graph(std::span<const Trajectory> trajectories, const GeometryConfig& geo_in,
                          const FeatureConfig& cfg) {
    cfg.validate();
    geo_in.validate();
    if (trajectories.empty()) throw InvalidInput("no trajectories");
    for (const auto& t : trajectories) t.validate();
    const std::size_t raw_len = trajectories.front().frames();
    const double rate = trajectories.front().frame_rate;
    for (const auto& t : trajectories) {
        if (t.frames() != raw_len) throw MismatchedLengths("trajectories differ in frame count");
        if (t.frame_rate != rate) throw InvalidInput("trajectories differ in frame rate");
    }

    std::vector<Trajectory> trajs;
    trajs.reserve(trajectories.size());
    for (const auto& t : trajectories) trajs.push_back(resample(t, cfg.resample_rate));
    const GeometryConfig geo = resolve_range(geo_in, trajs);

    const std::size_t n = trajs.size();
    const std::size_t T = trajs.front().frames();
    const auto Ti = static_cast<Eigen::Index>(T);

    std::vector<std::vector<ConeRaster>> rasters(n);
    std::vector<Eigen::VectorXd> counts(n);
    std::vector<Point2> others;
    for (std::size_t i = 0; i < n; ++i) {
        const auto heads = headings(trajs[i], geo);
        rasters[i].reserve(T);
        counts[i].resize(Ti);
        for (std::size_t t = 0; t < T; ++t) {
            const FovCone cone = cone_at(trajs[i], heads, t, geo);
            rasters[i].push_back(rasterize(cone, geo.grid_resolution_m));
            others.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others.push_back(trajs[j].positions[t]);
            counts[i](static_cast<Eigen::Index>(t)) = static_cast<double>(count_in_cone(cone, others));
        }
        counts[i] = z_normalize(counts[i]);
    }

    std::vector<ViewGraph::MatrixPtr> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd u(Ti, Ti);
        for (Eigen::Index q = 0; q < Ti; ++q) {
            u(q, q) = 1.0;
            for (Eigen::Index p = q + 1; p < Ti; ++p) {
                const double v = raster_iou(rasters[i][static_cast<std::size_t>(p)], rasters[i][static_cast<std::size_t>(q)]);
                u(p, q) = v;
                u(q, p) = v;
            }
        }
        nodes.push_back(std::make_shared<const Eigen::MatrixXd>(std::move(u)));
    }
    std::vector<ViewGraph::MatrixPtr> edges;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
            Eigen::MatrixXd b(Ti, Ti);
            for (Eigen::Index q = 0; q < Ti; ++q)
                for (Eigen::Index p = 0; p < Ti; ++p)
                    b(p, q) = raster_iou(rasters[k][static_cast<std::size_t>(p)], rasters[l][static_cast<std::size_t>(q)]);
            edges.push_back(std::make_shared<const Eigen::MatrixXd>(std::move(b)));
        }

    std::vector<std::string> ids;
    for (const auto& t : trajs) ids.push_back(t.viewer_id);
    return ViewGraph(ViewKind::Top, std::move(ids), std::move(nodes), std::move(counts), std::move(edges));
}

ViewGraph build_ego_graph(std::span<const EgoVideo> videos, const FeatureConfig& cfg) {
    cfg.validate();
    if (videos.empty()) throw InvalidInput("no egocentric videos");
    const Eigen::Index dim = videos.front().descriptors.cols();
    std::vector<Eigen::MatrixXd> desc;
    std::vector<Eigen::VectorXd> counts;
    std::vector<std::string> ids;
    for (const auto& v : videos) {
        if (v.descriptors.rows() == 0) throw InvalidInput("video '" + v.video_id + "' has no frames");
        if (v.descriptors.cols() != dim) throw DimensionMismatch("descriptor dimension differs across videos");
        if (v.counts.size() != v.descriptors.rows())
            throw DimensionMismatch("video '" + v.video_id + "' has counts and descriptors of different length");
        if (!(v.frame_rate > 0.0)) throw InvalidInput("video '" + v.video_id + "' has a bad frame rate");
        desc.push_back(l2_normalize_rows(resample_rows(v.descriptors, v.frame_rate, cfg.resample_rate)));
        counts.push_back(z_normalize(resample(v.counts, v.frame_rate, cfg.resample_rate)));
        ids.push_back(v.video_id);
    }

    auto cross = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        Eigen::MatrixXd out(a.rows(), b.rows());
        for (Eigen::Index q = 0; q < b.rows(); ++q)
            for (Eigen::Index p = 0; p < a.rows(); ++p)
                out(p, q) = gist_similarity(a.row(p), b.row(q), cfg.gamma);
        return out;
    };

    std::vector<ViewGraph::MatrixPtr> nodes;
    for (const auto& d : desc) {
        const Eigen::Index T = d.rows();
        Eigen::MatrixXd u(T, T);
        for (Eigen::Index q = 0; q < T; ++q) {
            u(q, q) = 1.0;
            for (Eigen::Index p = q + 1; p < T; ++p) {
                const double s = gist_similarity(d.row(p), d.row(q), cfg.gamma);
                u(p, q) = s;
                u(q, p) = s;
            }
        }
        nodes.push_back(std::make_shared<const Eigen::MatrixXd>(std::move(u)));
    }
    std::vector<ViewGraph::MatrixPtr> edges;
    for (std::size_t i = 0; i < desc.size(); ++i)
        for (std::size_t j = i + 1; j < desc.size(); ++j)
            edges.push_back(std::make_shared<const Eigen::MatrixXd>(cross(desc[i], desc[j])));
    return ViewGraph(ViewKind::Ego, std::move(ids), std::move(nodes), std::move(counts), std::move(edges));
}

Eigen::VectorXd ingest_detections(std::span<const DetectionRecord> rows, std::size_t frame_count,
                                  const FeatureConfig& cfg) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(frame_count));
    std::vector<const DetectionRecord*> kept;
    for (const auto& r : rows) {
        if (r.frame >= frame_count) throw InvalidInput("detection frame past the end of the video");
        if (r.box_height_fraction >= cfg.min_box_fraction) kept.push_back(&r);
    }
    if (kept.empty()) return out;
    const auto [lo_it, hi_it] = std::minmax_element(
        kept.begin(), kept.end(), [](const auto* a, const auto* b) { return a->score < b->score; });
    const double lo = (*lo_it)->score;
    const double range = (*hi_it)->score - lo;
    for (const auto* r : kept) {
        // A degenerate score range maps every surviving box to 1.
        const double s = range > 0.0 ? (r->score - lo) / range : 1.0;
        out(static_cast<Eigen::Index>(r->frame)) += s;
    }
    return out;
}

}  // namespace egotop
