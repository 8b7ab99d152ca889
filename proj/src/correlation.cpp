#include "egotop/correlation.hpp"

#include <limits>

#include "fft_correlation.hpp"

namespace egotop {

Corr2Max CorrelationSurface::best(bool diagonal_only) const {
    bool found = false;
    Corr2Max out{-std::numeric_limits<double>::infinity(), {}};
    for (int di = -lag_; di <= lag_; ++di) {
        for (int dj = -lag_; dj <= lag_; ++dj) {
            if (diagonal_only && dj != di) continue;
            const Offset2D off{di, dj};
            const double v = at(off);
            if (std::isnan(v)) continue;
            if (!found || improves(v, off, out.value, out.offset)) {
                out = {v, off};
                found = true;
            }
        }
    }
    if (!found) throw InsufficientOverlap("no admissible offset within the lag window");
    return out;
}

CorrelationSurface correlation_surface(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, int lag,
                                       double min_overlap_fraction) {
    if (lag < 0) throw InvalidInput("lag must be non-negative");
    const int nr = detail::fft_size(static_cast<int>(std::max(A.rows(), B.rows())) + lag);
    const int nc = detail::fft_size(static_cast<int>(std::max(A.cols(), B.cols())) + lag);
    const detail::SpectralOperand a(A, nr, nc);
    const detail::SpectralOperand b(B, nr, nc);
    return detail::correlation_surface(a, b, lag, min_overlap_fraction);
}

Corr2Max xcorr2_max(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const CorrConfig& cfg, bool node) {
    cfg.validate();
    const Eigen::Index shorter = std::min({A.rows(), A.cols(), B.rows(), B.cols()});
    const int lag = cfg.lag_for(shorter);
    return correlation_surface(A, B, lag, cfg.min_overlap_fraction).best(node && cfg.diagonal_only_for_nodes);
}

Eigen::VectorXd correlation_profile(const Eigen::VectorXd& u, const Eigen::VectorXd& v, int lag,
                                    double min_overlap_fraction) {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(2 * lag + 1, std::nan(""));
    for (int d = -lag; d <= lag; ++d) {
        const auto ov = axis_overlap(u.size(), v.size(), d, min_overlap_fraction);
        if (!ov) continue;
        out(d + lag) = pearson(u.segment(ov->start, ov->length), v.segment(ov->start + d, ov->length));
    }
    return out;
}

Corr1Max xcorr1_max(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const CorrConfig& cfg) {
    cfg.validate();
    const int lag = cfg.lag_for(std::min(u.size(), v.size()));
    const Eigen::VectorXd prof = correlation_profile(u, v, lag, cfg.min_overlap_fraction);
    bool found = false;
    Corr1Max out;
    for (int d = -lag; d <= lag; ++d) {
        const double val = prof(d + lag);
        if (std::isnan(val)) continue;
        if (!found || improves(val, {d, 0}, out.value, {out.offset, 0})) {
            out = {val, d};
            found = true;
        }
    }
    if (!found) throw InsufficientOverlap("no admissible 1D offset within the lag window");
    return out;
}

}  // namespace egotop
