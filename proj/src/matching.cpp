#include "egotop/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "egotop/affinity_bank.hpp"

namespace egotop {

Eigen::MatrixXi HardAssignment::matrix() const {
    Eigen::MatrixXi X = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(columns.size()), static_cast<Eigen::Index>(n_top));
    for (std::size_t i = 0; i < columns.size(); ++i) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(columns[i])) = 1;
    return X;
}

EigenResult leading_eigenvector(const Eigen::MatrixXd& A, const SpectralConfig& cfg) {
    cfg.validate();
    if (A.rows() != A.cols() || A.rows() == 0) throw InvalidInput("affinity must be square and non-empty");
    if (A.cwiseAbs().maxCoeff() == 0.0) throw ZeroMatrix("affinity matrix is all zeros");

    const Eigen::Index n = A.rows();
    EigenResult out;
    out.p = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (int it = 1; it <= cfg.power_iter_max; ++it) {
        Eigen::VectorXd next = A * out.p;
        const double norm = next.norm();
        if (norm == 0.0) throw ZeroMatrix("power iteration collapsed to the zero vector");
        next /= norm;
        const double change = (next - out.p).cwiseAbs().maxCoeff();
        out.p = std::move(next);
        out.iterations = it;
        if (change < cfg.power_iter_tol) {
            out.converged = true;
            break;
        }
    }
    out.p = out.p.cwiseMax(cfg.nonneg_floor);
    const double pn = out.p.norm();
    if (pn > 0.0) out.p /= pn;
    out.lambda = out.p.dot(A * out.p);
    return out;
}

SoftAssignment soft_assignment(const Eigen::VectorXd& p, std::size_t n_ego, std::size_t n_top) {
    if (static_cast<std::size_t>(p.size()) != n_ego * n_top) throw DimensionMismatch("eigenvector length is not n_ego * n_top");
    SoftAssignment s;
    s.P.resize(static_cast<Eigen::Index>(n_ego), static_cast<Eigen::Index>(n_top));
    for (std::size_t i = 0; i < n_ego; ++i)
        for (std::size_t k = 0; k < n_top; ++k)
            s.P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                std::max(0.0, p(static_cast<Eigen::Index>(i * n_top + k)));
    for (Eigen::Index i = 0; i < s.P.rows(); ++i) {
        const double sum = s.P.row(i).sum();
        if (sum > 0.0)
            s.P.row(i) /= sum;
        else
            s.P.row(i).setConstant(1.0 / static_cast<double>(n_top));
    }
    return s;
}

namespace {

// Minimum-cost assignment of every row (rows <= cols), shortest augmenting path with
// potentials. Returns the column of each row.
std::vector<std::size_t> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const auto n = static_cast<std::size_t>(cost.rows());
    const auto m = static_cast<std::size_t>(cost.cols());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = owner[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (owner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> cols(n, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (owner[j] != 0) cols[owner[j] - 1] = j - 1;
    return cols;
}

double best_profit(const Eigen::MatrixXd& profit, const std::vector<std::size_t>& rows,
                   const std::vector<std::size_t>& cols) {
    if (rows.empty()) return 0.0;
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = 0; b < cols.size(); ++b)
            cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                -profit(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
    const auto pick = min_cost_assignment(cost);
    double total = 0.0;
    for (std::size_t a = 0; a < rows.size(); ++a)
        total += profit(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[pick[a]]));
    return total;
}

}  // namespace

HardAssignment hungarian(const Eigen::MatrixXd& profit) {
    const auto n = static_cast<std::size_t>(profit.rows());
    const auto m = static_cast<std::size_t>(profit.cols());
    if (n > m) throw InvalidInput("more ego videos than top-view viewers");
    if (!profit.allFinite()) throw InvalidInput("profit matrix has non-finite entries");
    HardAssignment out;
    out.n_top = m;
    if (n == 0) return out;

    std::vector<std::size_t> all_rows(n), all_cols(m);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;
    for (std::size_t j = 0; j < m; ++j) all_cols[j] = j;
    const double optimum = best_profit(profit, all_rows, all_cols);
    const double tol = 1e-10 * std::max(1.0, std::abs(optimum));

    // Fix rows in order, each to the smallest column that still admits an optimal completion.
    std::vector<char> taken(m, 0);
    double fixed = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::size_t> rest_rows;
        for (std::size_t i = r + 1; i < n; ++i) rest_rows.push_back(i);
        bool placed = false;
        for (std::size_t c = 0; c < m && !placed; ++c) {
            if (taken[c]) continue;
            std::vector<std::size_t> rest_cols;
            for (std::size_t j = 0; j < m; ++j)
                if (!taken[j] && j != c) rest_cols.push_back(j);
            const double here = profit(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            const double total = fixed + here + best_profit(profit, rest_rows, rest_cols);
            if (total >= optimum - tol) {
                out.columns.push_back(c);
                taken[c] = 1;
                fixed += here;
                placed = true;
            }
        }
        if (!placed) throw Error("assignment tie-break lost the optimum");
    }
    return out;
}

double assignment_profit(const Eigen::MatrixXd& profit, const HardAssignment& x) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.columns.size(); ++i)
        total += profit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x.columns[i]));
    return total;
}

double matching_score(const AffinityMatrix& A, const HardAssignment& X) {
    if (X.columns.size() != A.n_ego || X.n_top != A.n_top) throw DimensionMismatch("assignment does not fit the affinity");
    double s = 0.0;
    for (std::size_t i = 0; i < A.n_ego; ++i)
        for (std::size_t j = 0; j < A.n_ego; ++j)
            s += A.data(A.index(i, X.columns[i]), A.index(j, X.columns[j]));
    return s;
}

int resolve_max_lag(const ViewGraph& ego, const ViewGraph& top, const CorrConfig& ccfg) {
    std::size_t shorter = top.frames(0);
    for (std::size_t i = 0; i < ego.size(); ++i) shorter = std::min(shorter, ego.frames(i));
    for (std::size_t k = 0; k < top.size(); ++k) shorter = std::min(shorter, top.frames(k));
    return ccfg.lag_for(static_cast<Eigen::Index>(shorter));
}

AffinityMatrix build_affinity_free(const ViewGraph& ego, const ViewGraph& top, const FeatureConfig& fcfg,
                                   const CorrConfig& ccfg) {
    return AffinityBank(ego, top, fcfg, ccfg).free();
}

AffinityMatrix build_affinity_fixed(const ViewGraph& ego, const ViewGraph& top, std::span<const int> delays,
                                    const FeatureConfig& fcfg, const CorrConfig& ccfg) {
    fcfg.validate();
    ccfg.validate();
    const std::size_t ne = ego.size();
    const std::size_t nt = top.size();
    if (ne > nt) throw InvalidInput("more ego videos than top-view viewers");
    if (delays.size() != ne) throw DimensionMismatch("one delay per ego video is required");

    AffinityMatrix A;
    A.n_ego = ne;
    A.n_top = nt;
    A.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ne * nt), static_cast<Eigen::Index>(ne * nt));

    auto guarded = [&](auto&& f, const char* what, std::size_t i, std::size_t k) {
        try {
            return f();
        } catch (const InsufficientOverlap&) {
            std::ostringstream os;
            os << what << " (" << i << "," << k << ") has insufficient overlap; treated as 0";
            A.diagnostics.push_back(os.str());
            return 0.0;
        }
    };

    for (std::size_t i = 0; i < ne; ++i) {
        const int d = delays[i];
        for (std::size_t k = 0; k < nt; ++k) {
            const double img = guarded([&] { return xcorr2_at(ego.node(i), top.node(k), Offset2D{d, d}, ccfg); },
                                       "node image", i, k);
            const double cnt = guarded([&] { return xcorr1_at(ego.counts(i), top.counts(k), d, ccfg); },
                                       "node count", i, k);
            const auto idx = A.index(i, k);
            A.data(idx, idx) = std::max(0.0, fcfg.alpha * img + (1.0 - fcfg.alpha) * cnt);
        }
    }
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = i + 1; j < ne; ++j) {
            const Eigen::MatrixXd& g = ego.edge_upper(i, j);
            const Offset2D off{delays[i], delays[j]};
            for (std::size_t k = 0; k < nt; ++k)
                for (std::size_t l = 0; l < nt; ++l) {
                    if (k == l) continue;
                    const double v = guarded(
                        [&] {
                            return k < l ? xcorr2_at(g, top.edge_upper(k, l), off, ccfg)
                                         : xcorr2_at(g, top.edge_upper(l, k).transpose(), off, ccfg);
                        },
                        "edge", i * nt + k, j * nt + l);
                    const double a = std::max(0.0, v);
                    A.data(A.index(i, k), A.index(j, l)) = a;
                    A.data(A.index(j, l), A.index(i, k)) = a;
                }
        }
    return A;
}

}  // namespace egotop
