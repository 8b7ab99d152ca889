#pragma once

// FFT-backed evaluation of Pearson correlation over every 2D offset at once.

#include <complex>
#include <memory>

#include <Eigen/Core>

#include "egotop/correlation.hpp"

namespace egotop::detail {

/// Smallest n' >= n whose only prime factors are 2, 3, 5 and 7.
int fft_size(int n);

struct FftwDeleter {
    void operator()(void* p) const;
};

/// A matrix prepared for repeated correlation: centred spectrum on a fixed FFT grid plus
/// summed-area tables of the centred values and their squares.
class SpectralOperand {
public:
    SpectralOperand(const Eigen::MatrixXd& m, int fft_rows, int fft_cols);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }
    int fft_rows() const { return fft_rows_; }
    int fft_cols() const { return fft_cols_; }
    const std::complex<double>* spectrum() const { return spectrum_.get(); }

    double sum(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const {
        return rect(sum_, r0, c0, nr, nc);
    }
    double sum_sq(Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) const {
        return rect(sum_sq_, r0, c0, nr, nc);
    }

private:
    static double rect(const Eigen::MatrixXd& s, Eigen::Index r0, Eigen::Index c0, Eigen::Index nr, Eigen::Index nc) {
        return s(r0 + nr, c0 + nc) - s(r0, c0 + nc) - s(r0 + nr, c0) + s(r0, c0);
    }

    Eigen::Index rows_ = 0, cols_ = 0;
    int fft_rows_ = 0, fft_cols_ = 0;
    Eigen::MatrixXd sum_, sum_sq_;
    std::unique_ptr<std::complex<double>[], FftwDeleter> spectrum_;
};

/// Correlation of `a` placed within `b` at every offset in [-lag, lag]^2. Both operands
/// must share the FFT grid, which must be at least max(side) + lag on each axis.
CorrelationSurface correlation_surface(const SpectralOperand& a, const SpectralOperand& b, int lag,
                                       double min_overlap_fraction);

}  // namespace egotop::detail
