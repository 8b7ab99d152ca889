#include "egotop/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "egotop/errors.hpp"

namespace egotop {

std::string label(Method m) {
    switch (m) {
        case Method::Free: return "baseline_free";
        case Method::Spectral: return "spectral";
        case Method::MatchingScore: return "matching_score";
    }
    return "?";
}

std::string label(Init i) { return i == Init::Zero ? "zero" : "median"; }

Method parse_method(const std::string& s) {
    if (s == "free") return Method::Free;
    if (s == "spectral") return Method::Spectral;
    if (s == "score") return Method::MatchingScore;
    throw InvalidInput("unknown method '" + s + "' (free, spectral, score)");
}

Init parse_init(const std::string& s) {
    if (s == "zero") return Init::Zero;
    if (s == "median") return Init::Median;
    throw InvalidInput("unknown init '" + s + "' (zero, median)");
}

ViewGraph build_top_graph(const LoadedScenario& s, const PipelineConfig& cfg) {
    GeometryConfig geo = cfg.geometry;
    if (!geo.range_m) geo.range_m = s.config.range();
    return build_top_graph(s.trajectories, geo, cfg.features);
}

SceneGraphs build_graphs(const LoadedScenario& s, const PipelineConfig& cfg) {
    return SceneGraphs{build_ego_graph(s.ego, cfg.features), build_top_graph(s, cfg)};
}

AffinityBank make_bank(const ViewGraph& ego, const ViewGraph& top, const PipelineConfig& cfg) {
    return AffinityBank(ego, top, cfg.features, cfg.corr);
}

AffinityBank make_bank(const SceneGraphs& g, const PipelineConfig& cfg) { return make_bank(g.ego, g.top, cfg); }

PipelineResult run_pipeline(const AffinityBank& bank, const PipelineConfig& cfg) {
    PipelineResult r;
    if (cfg.method == Method::Free) {
        r.affinity = bank.free();
        const auto m = spectral_match(r.affinity, cfg.spectral);
        r.eigen = m.eigen;
        r.soft = m.soft;
        r.hard = m.hard;
        r.score = m.score;
        return r;
    }
    OptimizerConfig ocfg = cfg.optimizer;
    ocfg.objective = cfg.method == Method::Spectral ? Objective::Spectral : Objective::MatchingScore;
    const DelayVector t0 = cfg.init == Init::Zero ? init_delays_zero(bank.n_ego(), ocfg.step_frames)
                                                  : init_delays_median(bank, ocfg.step_frames);
    auto res = optimize(bank, t0, ocfg, cfg.spectral);
    r.affinity = std::move(res.affinity);
    r.eigen = std::move(res.eigen);
    r.soft = std::move(res.soft);
    r.hard = std::move(res.hard);
    r.score = res.score;
    r.delays = std::move(res.delays.delays);
    r.trace = std::move(res.trace);
    return r;
}

double assignment_accuracy(const HardAssignment& X, std::span<const std::size_t> truth) {
    if (X.columns.size() != truth.size()) throw DimensionMismatch("assignment and truth differ in size");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += X.columns[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

CmcCurve cmc_from_ranks(std::span<const std::size_t> ranks, std::size_t n) {
    CmcCurve c;
    c.hits_at_rank.assign(n, 0.0);
    if (ranks.empty()) return c;
    for (std::size_t r : ranks)
        for (std::size_t k = std::max<std::size_t>(r, 1); k <= n; ++k) c.hits_at_rank[k - 1] += 1.0;
    for (auto& h : c.hits_at_rank) h /= static_cast<double>(ranks.size());
    return c;
}

std::vector<std::size_t> viewer_ranks(const SoftAssignment& P, std::span<const std::size_t> truth) {
    if (static_cast<std::size_t>(P.P.rows()) != truth.size()) throw DimensionMismatch("P rows and truth differ");
    std::vector<std::size_t> ranks;
    for (Eigen::Index i = 0; i < P.P.rows(); ++i) {
        const double p_true = P.P(i, static_cast<Eigen::Index>(truth[static_cast<std::size_t>(i)]));
        ranks.push_back(static_cast<std::size_t>((P.P.row(i).array() >= p_true).count()));
    }
    return ranks;
}

CmcCurve viewer_cmc(const SoftAssignment& P, std::span<const std::size_t> truth) {
    return cmc_from_ranks(viewer_ranks(P, truth), static_cast<std::size_t>(P.P.cols()));
}

TopviewRanking rank_topviews(const ViewGraph& ego, std::span<const ViewGraph> candidates, const PipelineConfig& cfg,
                             std::optional<std::size_t> truth) {
    if (candidates.size() < 2) throw InvalidInput("ranking needs at least two candidates");
    if (truth && *truth >= candidates.size()) throw InvalidInput("true candidate index out of range");
    TopviewRanking out;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        RankedCandidate rc{c, 0.0, false, {}};
        try {
            rc.score = run_pipeline(make_bank(ego, candidates[c], cfg), cfg).score;
        } catch (const Error& e) {
            rc.failed = true;
            rc.score = -std::numeric_limits<double>::infinity();
            rc.diagnostic = e.what();
        }
        out.ranked.push_back(std::move(rc));
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const auto& a, const auto& b) {
        if (a.failed != b.failed) return !a.failed;
        return a.score > b.score;
    });
    if (truth) {
        const auto it = std::find_if(out.ranked.begin(), out.ranked.end(),
                                     [&](const auto& r) { return r.candidate == *truth; });
        std::size_t rank = 0;
        for (const auto& r : out.ranked)
            if (it->failed ? true : (!r.failed && r.score >= it->score)) ++rank;
        out.truth_rank = rank;
        out.normalized_truth_rank = static_cast<double>(rank - 1) / static_cast<double>(candidates.size() - 1);
    }
    return out;
}

CompletenessSweep sweep_completeness(std::span<const EvalScene> scenes, const PipelineConfig& cfg) {
    CompletenessSweep sweep;
    const double edges[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> sums(5, 0.0);
    for (int b = 0; b < 5; ++b) sweep.bins.push_back({edges[b], edges[b + 1], 0, 0.0});

    for (const auto& scene : scenes) {
        const std::size_t n = scene.bank->n_ego();
        if (n < 2) throw InvalidInput("completeness sweep needs scenes with at least two ego videos");
        if (n > 6) throw InvalidInput("completeness sweep is capped at 63 subsets per scene");
        for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
            std::vector<std::size_t> nodes, truth;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) {
                    nodes.push_back(i);
                    truth.push_back(scene.truth[i]);
                }
            const auto sub = scene.bank->subset(nodes);
            const double acc = assignment_accuracy(run_pipeline(sub, cfg).hard, truth);
            const double ratio = static_cast<double>(nodes.size()) / static_cast<double>(sub.n_top());
            const auto b = static_cast<std::size_t>(std::min(4.0, std::floor(ratio / 0.2 + 1e-12)));
            sums[b] += acc;
            ++sweep.bins[b].count;
            ++sweep.subsets_evaluated;
        }
    }
    for (std::size_t b = 0; b < 5; ++b)
        sweep.bins[b].mean_accuracy = sweep.bins[b].count ? sums[b] / static_cast<double>(sweep.bins[b].count)
                                                          : std::numeric_limits<double>::quiet_NaN();
    return sweep;
}

std::vector<LengthRow> sweep_length(const SceneGraphs& g, std::span<const std::size_t> truth,
                                    const PipelineConfig& cfg, std::span<const std::size_t> lengths) {
    std::size_t full = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < g.ego.size(); ++i) full = std::min(full, g.ego.frames(i));
    for (std::size_t k = 0; k < g.top.size(); ++k) full = std::min(full, g.top.frames(k));

    std::vector<LengthRow> rows;
    for (std::size_t len : lengths) {
        LengthRow row{len, false, {}, 0.0};
        if (len < kMinSweepLength) {
            row.skipped = true;
            row.diagnostic = "shorter than " + std::to_string(kMinSweepLength) + " frames";
        } else if (len > full) {
            row.skipped = true;
            row.diagnostic = "longer than the streams (" + std::to_string(full) + " frames)";
        } else {
            try {
                const auto bank = len == full ? make_bank(g, cfg)
                                              : make_bank(g.ego.truncated(len), g.top.truncated(len), cfg);
                row.accuracy = assignment_accuracy(run_pipeline(bank, cfg).hard, truth);
            } catch (const InsufficientOverlap& e) {
                row.skipped = true;
                row.diagnostic = e.what();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<BaselineRow> run_baselines(const AffinityBank& bank, std::span<const std::size_t> truth,
                                       const PipelineConfig& cfg, std::uint64_t seed) {
    const std::size_t ne = bank.n_ego(), nt = bank.n_top();
    std::vector<BaselineRow> rows;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> cols(nt);
    double sum = 0.0;
    for (int d = 0; d < kRandomDraws; ++d) {
        std::iota(cols.begin(), cols.end(), 0);
        std::shuffle(cols.begin(), cols.end(), rng);
        HardAssignment x{{cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(ne)}, nt};
        sum += assignment_accuracy(x, truth);
    }
    rows.push_back({"random", sum / kRandomDraws, {}});

    auto unary = [&](const std::string& name, auto&& value) {
        Eigen::MatrixXd profit(ne, nt);
        for (std::size_t i = 0; i < ne; ++i)
            for (std::size_t k = 0; k < nt; ++k)
                profit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::max(0.0, value(i, k));
        auto x = hungarian(profit);
        rows.push_back({name, assignment_accuracy(x, truth), std::move(x)});
    };
    auto finite = [](double v) { return std::isfinite(v) ? v : 0.0; };
    unary("counts_only", [&](std::size_t i, std::size_t k) { return finite(bank.node_count_best(i, k).value); });
    unary("image_only", [&](std::size_t i, std::size_t k) { return finite(bank.node_image_best(i, k).value); });
    unary("unary_only", [&](std::size_t i, std::size_t k) { return finite(bank.node_best(i, k)); });

    PipelineConfig free_cfg = cfg;
    free_cfg.method = Method::Free;
    auto gm = run_pipeline(bank, free_cfg);
    rows.push_back({"graph_matching_free", assignment_accuracy(gm.hard, truth), std::move(gm.hard)});
    return rows;
}

}  // namespace egotop
