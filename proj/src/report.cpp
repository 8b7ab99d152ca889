#include "egotop/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace egotop {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// JSON has no NaN or infinity.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const CmcCurve& c) {
    Json j = Json::array();
    for (double h : c.hits_at_rank) j.push_back(h);
    return j;
}

Json to_json(const HardAssignment& x, const ViewGraph& ego, const ViewGraph& top) {
    Json j = Json::object();
    for (std::size_t i = 0; i < x.columns.size(); ++i) j[ego.node_ids()[i]] = top.node_ids()[x.columns[i]];
    return j;
}

Json to_json(const TopviewRanking& r) {
    Json j;
    j["ranked"] = Json::array();
    for (const auto& c : r.ranked) {
        Json e;
        e["candidate"] = c.candidate;
        e["score"] = number(c.score);
        if (c.failed) e["diagnostic"] = c.diagnostic;
        j["ranked"].push_back(e);
    }
    if (r.truth_rank) j["truth_rank"] = *r.truth_rank;
    if (r.normalized_truth_rank) j["normalized_truth_rank"] = *r.normalized_truth_rank;
    return j;
}

Json to_json(const CompletenessSweep& s) {
    Json j;
    j["subsets_evaluated"] = s.subsets_evaluated;
    j["bins"] = Json::array();
    for (const auto& b : s.bins)
        j["bins"].push_back(Json{{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}, {"mean_accuracy", number(b.mean_accuracy)}});
    return j;
}

Json to_json(std::span<const LengthRow> rows) {
    Json j = Json::array();
    for (const auto& r : rows) {
        Json e{{"length", r.length}, {"skipped", r.skipped}};
        if (r.skipped) e["diagnostic"] = r.diagnostic;
        else e["accuracy"] = r.accuracy;
        j.push_back(e);
    }
    return j;
}

Json to_json(std::span<const BaselineRow> rows) {
    Json j = Json::array();
    for (const auto& r : rows) {
        Json e{{"name", r.name}, {"accuracy", r.accuracy}};
        if (!r.assignment.columns.empty()) e["columns"] = r.assignment.columns;
        j.push_back(e);
    }
    return j;
}

Json to_json(const PipelineConfig& cfg) {
    Json j;
    j["method"] = label(cfg.method);
    j["init"] = label(cfg.init);
    j["alpha"] = cfg.features.alpha;
    j["gamma"] = cfg.features.gamma;
    j["theta_d_deg"] = cfg.geometry.half_angle_deg;
    j["grid_resolution_m"] = cfg.geometry.grid_resolution_m;
    if (cfg.geometry.range_m) j["range_m"] = *cfg.geometry.range_m;
    if (cfg.corr.max_lag) j["max_lag"] = *cfg.corr.max_lag;
    j["min_overlap_fraction"] = cfg.corr.min_overlap_fraction;
    j["itr_max"] = cfg.optimizer.itr_max;
    j["epsilon"] = cfg.optimizer.epsilon;
    j["step_frames"] = cfg.optimizer.step_frames;
    return j;
}

Json match_report(const SceneGraphs& g, const PipelineResult& r, std::span<const std::size_t> truth,
                  const PipelineConfig& cfg) {
    Json j;
    j["method"] = label(cfg.method);
    j["init"] = label(cfg.init);
    j["assignment"] = to_json(r.hard, g.ego, g.top);
    j["matching_score"] = r.score;
    j["lambda"] = r.eigen.lambda;
    j["eigen_converged"] = r.eigen.converged;
    Json P = Json::array();
    for (Eigen::Index i = 0; i < r.soft.P.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < r.soft.P.cols(); ++k) row.push_back(r.soft.P(i, k));
        P.push_back(row);
    }
    j["soft_assignment"] = P;
    if (!r.delays.empty()) j["delays"] = r.delays;
    if (r.trace) {
        Json t;
        t["termination"] = to_string(r.trace->termination);
        t["iterations"] = r.trace->iterations;
        t["objective"] = Json::array();
        for (const auto& e : r.trace->entries) t["objective"].push_back(e.objective);
        j["trace"] = t;
    }
    if (!truth.empty()) {
        j["accuracy"] = assignment_accuracy(r.hard, truth);
        j["viewer_cmc"] = to_json(viewer_cmc(r.soft, truth));
    }
    if (!r.affinity.diagnostics.empty()) j["diagnostics"] = r.affinity.diagnostics;
    j["config"] = to_json(cfg);
    return j;
}

Json without_timing(const Json& j) {
    if (j.is_object()) {
        Json out = Json::object();
        for (const auto& [k, v] : j.items())
            if (k != "timing") out[k] = without_timing(v);
        return out;
    }
    if (j.is_array()) {
        Json out = Json::array();
        for (const auto& v : j) out.push_back(without_timing(v));
        return out;
    }
    return j;
}

std::string cmc_csv(const CmcCurve& c) {
    std::ostringstream os;
    os << "rank,hits\n";
    for (std::size_t r = 0; r < c.hits_at_rank.size(); ++r) os << r + 1 << ',' << fmt(c.hits_at_rank[r]) << '\n';
    return os.str();
}

std::string completeness_csv(const CompletenessSweep& s) {
    std::ostringstream os;
    os << "ratio_lo,ratio_hi,count,mean_accuracy\n";
    for (const auto& b : s.bins) os << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << ',' << fmt(b.mean_accuracy) << '\n';
    return os.str();
}

std::string length_csv(std::span<const LengthRow> rows) {
    std::ostringstream os;
    os << "length,skipped,accuracy\n";
    for (const auto& r : rows) os << r.length << ',' << (r.skipped ? 1 : 0) << ',' << (r.skipped ? "" : fmt(r.accuracy)) << '\n';
    return os.str();
}

std::string baselines_csv(std::span<const BaselineRow> rows) {
    std::ostringstream os;
    os << "baseline,accuracy\n";
    for (const auto& r : rows) os << r.name << ',' << fmt(r.accuracy) << '\n';
    return os.str();
}

std::string ranking_csv(const TopviewRanking& r) {
    std::ostringstream os;
    os << "position,candidate,score\n";
    for (std::size_t p = 0; p < r.ranked.size(); ++p)
        os << p + 1 << ',' << r.ranked[p].candidate << ',' << fmt(r.ranked[p].score) << '\n';
    return os.str();
}

}  // namespace egotop
