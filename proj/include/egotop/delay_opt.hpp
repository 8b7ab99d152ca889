#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "egotop/affinity_bank.hpp"
#include "egotop/matching.hpp"

namespace egotop {

/// Offset of each ego video against the top-view clock, in frames at the common rate:
/// ego frame r shows the same instant as top-view frame r + delays[i].
struct DelayVector {
    std::vector<int> delays;
    int step_frames = 1;

    std::size_t size() const { return delays.size(); }
};

enum class Objective { Spectral, MatchingScore };

struct OptimizerConfig {
    int itr_max = 100;
    double epsilon = 1e-6;
    Objective objective = Objective::MatchingScore;
    int step_frames = 1;

    void validate() const {
        if (itr_max < 1) throw InvalidInput("itr_max must be at least 1");
        if (!(epsilon >= 0.0)) throw InvalidInput("epsilon must be non-negative");
        if (step_frames < 1) throw InvalidInput("step must be at least one frame");
    }
};

enum class Termination { LocalMax, IterationLimit };

std::string to_string(Termination t);

struct TraceEntry {
    int iteration = 0;
    std::vector<int> delays;
    double objective = 0.0;
};

struct OptimizationTrace {
    std::vector<TraceEntry> entries;  // entry 0 is the starting point; one more per accepted move
    Termination termination = Termination::LocalMax;
    int iterations = 0;               // neighbourhood sweeps performed
};

struct OptimizationResult {
    DelayVector delays;
    AffinityMatrix affinity;
    EigenResult eigen;
    SoftAssignment soft;
    HardAssignment hard;
    double score = 0.0;  // x^T A x at the final delays
    OptimizationTrace trace;
};

DelayVector init_delays_zero(std::size_t n_ego, int step_frames = 1);

/// Lower median of the delays suggested by every node and edge correlation maximum
/// involving each video, snapped to the step grid.
DelayVector init_delays_median(const AffinityBank& bank, int step_frames = 1);
DelayVector init_delays_median(const ViewGraph& ego, const ViewGraph& top, const FeatureConfig& fcfg,
                               const CorrConfig& ccfg, int step_frames = 1);

/// Steepest-ascent search over single-coordinate moves of one step, maximising the leading
/// eigenvalue of the fixed-delay affinity; assignment is computed once at the end.
OptimizationResult optimize_spectral(const AffinityBank& bank, const DelayVector& t0, const OptimizerConfig& ocfg,
                                     const SpectralConfig& scfg = {});

/// Same search, but every candidate is scored by x^T A x with x recomputed for it.
OptimizationResult optimize_matching_score(const AffinityBank& bank, const DelayVector& t0,
                                           const OptimizerConfig& ocfg, const SpectralConfig& scfg = {});

/// Dispatches on ocfg.objective.
OptimizationResult optimize(const AffinityBank& bank, const DelayVector& t0, const OptimizerConfig& ocfg,
                            const SpectralConfig& scfg = {});

/// Leading eigenvector, soft and hard assignment and score for one affinity. An all-zero
/// affinity gives a uniform eigenvector with lambda = 0 instead of throwing.
struct MatchOutcome {
    EigenResult eigen;
    SoftAssignment soft;
    HardAssignment hard;
    double score = 0.0;
};
MatchOutcome spectral_match(const AffinityMatrix& A, const SpectralConfig& scfg = {});

}  // namespace egotop
