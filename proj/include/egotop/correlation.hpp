#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>

#include <Eigen/Core>

#include "egotop/errors.hpp"

namespace egotop {

/// Placement of an egocentric matrix inside a top-view matrix: element (r, c) of the
/// former lines up with (r + di, c + dj) of the latter.
struct Offset2D {
    int di = 0;
    int dj = 0;
    bool operator==(const Offset2D&) const = default;
};

struct CorrConfig {
    /// Largest offset searched, in frames. Unset means a quarter of the shorter stream.
    std::optional<int> max_lag;
    /// Minimum overlap per axis, as a fraction of the shorter side on that axis.
    double min_overlap_fraction = 0.5;
    bool diagonal_only_for_nodes = true;

    int lag_for(Eigen::Index shorter_length) const {
        return max_lag ? *max_lag : static_cast<int>(shorter_length / 4);
    }
    void validate() const {
        if (max_lag && *max_lag < 0) throw InvalidInput("max_lag must be non-negative");
        if (!(min_overlap_fraction > 0.0 && min_overlap_fraction <= 1.0))
            throw InvalidInput("min_overlap_fraction must lie in (0, 1]");
    }
};

/// Per-element variance below which a window counts as constant.
inline constexpr double kConstantVariance = 1e-12;

/// Start and length of the overlap along one axis, in the first operand's indices.
struct AxisOverlap {
    Eigen::Index start = 0;
    Eigen::Index length = 0;
};

/// Overlap of an axis of length `na`, shifted by `d`, with an axis of length `nb`; empty
/// when it falls short of `min_fraction` of the shorter axis.
inline std::optional<AxisOverlap> axis_overlap(Eigen::Index na, Eigen::Index nb, int d, double min_fraction) {
    const Eigen::Index start = std::max<Eigen::Index>(0, -d);
    const Eigen::Index stop = std::min<Eigen::Index>(na, nb - d);
    const Eigen::Index len = stop - start;
    const double need = min_fraction * static_cast<double>(std::min(na, nb));
    if (len <= 0 || static_cast<double>(len) + 1e-9 < need) return std::nullopt;
    return AxisOverlap{start, len};
}

/// Pearson correlation of two equally-shaped blocks; constant blocks give 0.
template <class DA, class DB>
double pearson(const Eigen::DenseBase<DA>& a, const Eigen::DenseBase<DB>& b) {
    const double n = static_cast<double>(a.size());
    if (a.size() < 2) return 0.0;
    const double ma = a.sum() / n;
    const double mb = b.sum() / n;
    const auto ca = a.derived().array() - ma;
    const auto cb = b.derived().array() - mb;
    const double va = ca.square().sum();
    const double vb = cb.square().sum();
    if (va <= kConstantVariance * n || vb <= kConstantVariance * n) return 0.0;
    return std::clamp((ca * cb).sum() / std::sqrt(va * vb), -1.0, 1.0);
}

/// Pearson correlation of the overlapping blocks when A is placed at `off` within B.
template <class DA, class DB>
double xcorr2_at(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B, Offset2D off,
                 const CorrConfig& cfg) {
    const auto rows = axis_overlap(A.rows(), B.rows(), off.di, cfg.min_overlap_fraction);
    const auto cols = axis_overlap(A.cols(), B.cols(), off.dj, cfg.min_overlap_fraction);
    if (!rows || !cols) throw InsufficientOverlap("2D offset leaves too little overlap");
    return pearson(A.block(rows->start, cols->start, rows->length, cols->length),
                   B.block(rows->start + off.di, cols->start + off.dj, rows->length, cols->length));
}

/// Pearson correlation of u(r) against v(r + d) over their overlap.
template <class DA, class DB>
double xcorr1_at(const Eigen::MatrixBase<DA>& u, const Eigen::MatrixBase<DB>& v, int d, const CorrConfig& cfg) {
    const auto ov = axis_overlap(u.size(), v.size(), d, cfg.min_overlap_fraction);
    if (!ov) throw InsufficientOverlap("1D offset leaves too little overlap");
    return pearson(u.segment(ov->start, ov->length), v.segment(ov->start + d, ov->length));
}

struct Corr2Max {
    double value = 0.0;
    Offset2D offset;
};

struct Corr1Max {
    double value = 0.0;
    int offset = 0;
};

/// Values closer than this are ties, settled by the offset order below.
inline constexpr double kTieTolerance = 1e-12;

/// Strict order used to break ties: smaller |di| + |dj| first, then lexicographic.
inline bool offset_precedes(Offset2D a, Offset2D b) {
    const int na = std::abs(a.di) + std::abs(a.dj);
    const int nb = std::abs(b.di) + std::abs(b.dj);
    if (na != nb) return na < nb;
    if (a.di != b.di) return a.di < b.di;
    return a.dj < b.dj;
}

/// Whether candidate (value, off) beats the incumbent (best, best_off).
inline bool improves(double value, Offset2D off, double best, Offset2D best_off) {
    if (value > best + kTieTolerance) return true;
    return value >= best - kTieTolerance && offset_precedes(off, best_off);
}

/// Pearson correlation at every offset within +-lag on both axes.
class CorrelationSurface {
public:
    CorrelationSurface() = default;
    explicit CorrelationSurface(int lag)
        : lag_(lag), values_(Eigen::MatrixXd::Constant(2 * lag + 1, 2 * lag + 1, std::nan(""))) {}

    int lag() const { return lag_; }
    bool in_range(Offset2D off) const { return std::abs(off.di) <= lag_ && std::abs(off.dj) <= lag_; }
    /// NaN when the offset is out of range or leaves too little overlap.
    double at(Offset2D off) const {
        if (!in_range(off)) return std::nan("");
        return values_(off.di + lag_, off.dj + lag_);
    }
    bool admissible(Offset2D off) const { return !std::isnan(at(off)); }
    void set(Offset2D off, double v) { values_(off.di + lag_, off.dj + lag_) = v; }

    /// Maximum over admissible offsets, optionally restricted to di == dj.
    /// Throws InsufficientOverlap when nothing is admissible.
    Corr2Max best(bool diagonal_only) const;

private:
    int lag_ = 0;
    Eigen::MatrixXd values_;
};

/// Full correlation surface of A placed within B, computed with FFTs.
CorrelationSurface correlation_surface(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int lag,
                                       double min_overlap_fraction);

/// Best 2D offset within max_lag. `node` restricts the search to di == dj when the
/// config asks for it.
Corr2Max xcorr2_max(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const CorrConfig& cfg, bool node = false);

Corr1Max xcorr1_max(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const CorrConfig& cfg);

/// 1D correlation at every lag in [-lag, lag]; NaN where the overlap is too small.
Eigen::VectorXd correlation_profile(const Eigen::VectorXd& u, const Eigen::VectorXd& v, int lag,
                                    double min_overlap_fraction);

}  // namespace egotop
