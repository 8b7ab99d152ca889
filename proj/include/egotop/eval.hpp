#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egotop/affinity_bank.hpp"
#include "egotop/delay_opt.hpp"
#include "egotop/features.hpp"
#include "egotop/geometry.hpp"
#include "egotop/io.hpp"
#include "egotop/matching.hpp"

namespace egotop {

enum class Method { Free, Spectral, MatchingScore };
enum class Init { Zero, Median };

/// Report labels: baseline_free | spectral | matching_score, zero | median.
std::string label(Method m);
std::string label(Init i);
/// CLI spellings: free | spectral | score, zero | median.
Method parse_method(const std::string& s);
Init parse_init(const std::string& s);

struct PipelineConfig {
    Method method = Method::MatchingScore;
    Init init = Init::Median;
    GeometryConfig geometry;  // range unset: taken from the scenario
    FeatureConfig features;
    CorrConfig corr;
    OptimizerConfig optimizer;
    SpectralConfig spectral;
};

struct PipelineResult {
    AffinityMatrix affinity;
    EigenResult eigen;
    SoftAssignment soft;
    HardAssignment hard;
    double score = 0.0;
    std::vector<int> delays;                  // empty for the free-offset method
    std::optional<OptimizationTrace> trace;   // delay searches only
};

struct SceneGraphs {
    ViewGraph ego;
    ViewGraph top;
};

/// Graph construction for a scenario; the cone range defaults to the arena diagonal.
SceneGraphs build_graphs(const LoadedScenario& s, const PipelineConfig& cfg);
ViewGraph build_top_graph(const LoadedScenario& s, const PipelineConfig& cfg);

AffinityBank make_bank(const SceneGraphs& g, const PipelineConfig& cfg);
AffinityBank make_bank(const ViewGraph& ego, const ViewGraph& top, const PipelineConfig& cfg);

PipelineResult run_pipeline(const AffinityBank& bank, const PipelineConfig& cfg);

/// Fraction of ego rows assigned to their true column.
double assignment_accuracy(const HardAssignment& X, std::span<const std::size_t> truth);

struct CmcCurve {
    std::vector<double> hits_at_rank;  // index r-1: fraction of queries ranked within r
};

/// Cumulative curve over `n` ranks from 1-based ranks.
CmcCurve cmc_from_ranks(std::span<const std::size_t> ranks, std::size_t n);

/// Rank of the true column in each row of P, ties counted pessimistically.
std::vector<std::size_t> viewer_ranks(const SoftAssignment& P, std::span<const std::size_t> truth);
CmcCurve viewer_cmc(const SoftAssignment& P, std::span<const std::size_t> truth);

struct RankedCandidate {
    std::size_t candidate = 0;
    double score = 0.0;
    bool failed = false;
    std::string diagnostic;
};

struct TopviewRanking {
    std::vector<RankedCandidate> ranked;  // by score, descending; failures last
    std::optional<std::size_t> truth_rank;        // 1-based, pessimistic under ties
    std::optional<double> normalized_truth_rank;  // (rank - 1) / (n - 1)
};

TopviewRanking rank_topviews(const ViewGraph& ego, std::span<const ViewGraph> candidates, const PipelineConfig& cfg,
                             std::optional<std::size_t> truth = std::nullopt);

struct SweepBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_accuracy = 0.0;  // NaN when empty
};

struct CompletenessSweep {
    std::vector<SweepBin> bins;
    std::size_t subsets_evaluated = 0;
};

struct EvalScene {
    const AffinityBank* bank = nullptr;
    std::span<const std::size_t> truth;
};

/// Every non-empty ego subset of every scene, binned by n_ego / n_top.
CompletenessSweep sweep_completeness(std::span<const EvalScene> scenes, const PipelineConfig& cfg);

struct LengthRow {
    std::size_t length = 0;
    bool skipped = false;
    std::string diagnostic;
    double accuracy = 0.0;
};

inline constexpr std::size_t kMinSweepLength = 10;

/// Re-runs the pipeline on every prefix length of the streams.
std::vector<LengthRow> sweep_length(const SceneGraphs& g, std::span<const std::size_t> truth,
                                    const PipelineConfig& cfg, std::span<const std::size_t> lengths);

struct BaselineRow {
    std::string name;  // random | counts_only | image_only | unary_only | graph_matching_free
    double accuracy = 0.0;
    HardAssignment assignment;  // empty for random
};

inline constexpr int kRandomDraws = 100;

std::vector<BaselineRow> run_baselines(const AffinityBank& bank, std::span<const std::size_t> truth,
                                       const PipelineConfig& cfg, std::uint64_t seed);

}  // namespace egotop
