#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "egotop/correlation.hpp"
#include "egotop/errors.hpp"
#include "egotop/features.hpp"

namespace egotop {

/// Affinity between candidate correspondences. Entry (i*n_top + k, j*n_top + l) scores
/// matching ego i to top k jointly with ego j to top l.
struct AffinityMatrix {
    Eigen::MatrixXd data;
    std::size_t n_ego = 0;
    std::size_t n_top = 0;
    std::vector<std::string> diagnostics;

    Eigen::Index index(std::size_t ego, std::size_t top) const {
        return static_cast<Eigen::Index>(ego * n_top + top);
    }
};

/// Row-stochastic probabilities of matching each ego video to each top-view viewer.
struct SoftAssignment {
    Eigen::MatrixXd P;
};

/// Injective map from ego rows to top-view columns.
struct HardAssignment {
    std::vector<std::size_t> columns;  // columns[i] = top viewer assigned to ego i
    std::size_t n_top = 0;

    Eigen::MatrixXi matrix() const;
};

struct SpectralConfig {
    double power_iter_tol = 1e-10;
    int power_iter_max = 1000;
    double nonneg_floor = 0.0;

    void validate() const {
        if (!(power_iter_tol > 0.0)) throw InvalidInput("power iteration tolerance must be positive");
        if (power_iter_max < 1) throw InvalidInput("power iteration needs at least one step");
    }
};

struct EigenResult {
    double lambda = 0.0;
    Eigen::VectorXd p;
    int iterations = 0;
    /// False when the iteration cap was hit; `p` then holds the last iterate.
    bool converged = false;
};

/// Power iteration from the uniform positive vector. Throws ZeroMatrix for A == 0.
EigenResult leading_eigenvector(const Eigen::MatrixXd& A, const SpectralConfig& cfg = {});
inline EigenResult leading_eigenvector(const AffinityMatrix& A, const SpectralConfig& cfg = {}) {
    return leading_eigenvector(A.data, cfg);
}

SoftAssignment soft_assignment(const Eigen::VectorXd& p, std::size_t n_ego, std::size_t n_top);

/// Maximum-profit injective assignment of rows to columns (rows <= columns). Among optimal
/// assignments the lexicographically smallest column vector wins.
HardAssignment hungarian(const Eigen::MatrixXd& profit);
inline HardAssignment hungarian(const SoftAssignment& s) { return hungarian(s.P); }

/// Total profit of an assignment, summed in row order.
double assignment_profit(const Eigen::MatrixXd& profit, const HardAssignment& x);

/// x^T A x with x = vec(X).
double matching_score(const AffinityMatrix& A, const HardAssignment& X);

/// Affinity where every node and edge comparison takes its best offset independently.
AffinityMatrix build_affinity_free(const ViewGraph& ego, const ViewGraph& top, const FeatureConfig& fcfg,
                                   const CorrConfig& ccfg);

/// Affinity with every comparison evaluated at the offsets implied by one delay per ego
/// video. Uses the direct kernels; AffinityBank::fixed is the fast equivalent.
AffinityMatrix build_affinity_fixed(const ViewGraph& ego, const ViewGraph& top, std::span<const int> delays,
                                    const FeatureConfig& fcfg, const CorrConfig& ccfg);

/// Largest offset searched for a given pair of graphs.
int resolve_max_lag(const ViewGraph& ego, const ViewGraph& top, const CorrConfig& ccfg);

}  // namespace egotop
