#include "egotop/delay_opt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace egotop {

std::string to_string(Termination t) { return t == Termination::LocalMax ? "local_max" : "itr_max"; }

MatchOutcome spectral_match(const AffinityMatrix& A, const SpectralConfig& scfg) {
    MatchOutcome m;
    try {
        m.eigen = leading_eigenvector(A, scfg);
    } catch (const ZeroMatrix&) {
        // Nothing to match on: every correspondence is equally (un)likely.
        const auto n = static_cast<Eigen::Index>(A.n_ego * A.n_top);
        m.eigen = EigenResult{0.0, Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))), 0, true};
    }
    m.soft = soft_assignment(m.eigen.p, A.n_ego, A.n_top);
    m.hard = hungarian(m.soft);
    m.score = matching_score(A, m.hard);
    return m;
}

DelayVector init_delays_zero(std::size_t n_ego, int step_frames) {
    return DelayVector{std::vector<int>(n_ego, 0), step_frames};
}

DelayVector init_delays_median(const AffinityBank& bank, int step_frames) {
    if (step_frames < 1) throw InvalidInput("step must be at least one frame");
    DelayVector t{std::vector<int>(bank.n_ego(), 0), step_frames};
    const int lag = bank.max_lag();
    for (std::size_t i = 0; i < bank.n_ego(); ++i) {
        auto s = bank.delay_suggestions(i);
        if (s.empty()) continue;
        const auto mid = s.begin() + static_cast<std::ptrdiff_t>((s.size() - 1) / 2);
        std::nth_element(s.begin(), mid, s.end());
        const long snapped = std::lround(static_cast<double>(*mid) / step_frames) * step_frames;
        // Snapping can step past the window; pull back by whole steps.
        long d = snapped;
        while (d > lag) d -= step_frames;
        while (d < -lag) d += step_frames;
        t.delays[i] = static_cast<int>(d);
    }
    return t;
}

DelayVector init_delays_median(const ViewGraph& ego, const ViewGraph& top, const FeatureConfig& fcfg,
                               const CorrConfig& ccfg, int step_frames) {
    return init_delays_median(AffinityBank(ego, top, fcfg, ccfg), step_frames);
}

namespace {

using ObjectiveFn = std::function<double(const AffinityMatrix&)>;

OptimizationResult ascend(const AffinityBank& bank, const DelayVector& t0, const OptimizerConfig& ocfg,
                          const SpectralConfig& scfg, const ObjectiveFn& objective) {
    ocfg.validate();
    scfg.validate();
    if (t0.size() != bank.n_ego()) throw DimensionMismatch("initial delays do not match the ego count");
    const int lag = bank.max_lag();
    const int step = ocfg.step_frames;

    std::vector<int> t = t0.delays;
    AffinityMatrix A = bank.fixed(t);
    if (A.data.isZero(0.0)) throw ZeroMatrix("affinity at the initial delays is identically zero");
    double current = objective(A);

    OptimizationResult res;
    res.trace.entries.push_back({0, t, current});
    res.trace.termination = Termination::IterationLimit;

    for (int it = 1; it <= ocfg.itr_max; ++it) {
        res.trace.iterations = it;
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> best_t;
        AffinityMatrix best_A;
        // Lowest coordinate first, negative direction first: the first strict maximum wins.
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (int dir : {-step, step}) {
                std::vector<int> cand = t;
                cand[i] += dir;
                if (std::abs(cand[i]) > lag) continue;
                AffinityMatrix Ac = A;
                bank.refresh(Ac, cand, i);
                const double v = objective(Ac);
                if (v > best) {
                    best = v;
                    best_t = std::move(cand);
                    best_A = std::move(Ac);
                }
            }
        }
        if (best_t.empty() || !(best > current + ocfg.epsilon)) {
            res.trace.termination = Termination::LocalMax;
            break;
        }
        t = std::move(best_t);
        A = std::move(best_A);
        current = best;
        res.trace.entries.push_back({it, t, current});
    }

    const MatchOutcome m = spectral_match(A, scfg);
    res.delays = DelayVector{t, step};
    res.affinity = std::move(A);
    res.eigen = m.eigen;
    res.soft = m.soft;
    res.hard = m.hard;
    res.score = m.score;
    return res;
}

}  // namespace

OptimizationResult optimize_spectral(const AffinityBank& bank, const DelayVector& t0, const OptimizerConfig& ocfg,
                                     const SpectralConfig& scfg) {
    return ascend(bank, t0, ocfg, scfg, [&](const AffinityMatrix& A) { return spectral_match(A, scfg).eigen.lambda; });
}

OptimizationResult optimize_matching_score(const AffinityBank& bank, const DelayVector& t0,
                                           const OptimizerConfig& ocfg, const SpectralConfig& scfg) {
    return ascend(bank, t0, ocfg, scfg, [&](const AffinityMatrix& A) { return spectral_match(A, scfg).score; });
}

OptimizationResult optimize(const AffinityBank& bank, const DelayVector& t0, const OptimizerConfig& ocfg,
                            const SpectralConfig& scfg) {
    return ocfg.objective == Objective::Spectral ? optimize_spectral(bank, t0, ocfg, scfg)
                                                 : optimize_matching_score(bank, t0, ocfg, scfg);
}

}  // namespace egotop
