#include "fft_correlation.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <utility>

namespace egotop::detail {

namespace {

struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

// Planning is not thread-safe in FFTW; execution with the new-array interface is.
// FFTW_ESTIMATE keeps the chosen algorithm, and hence every bit of the output, stable
// from run to run.
const Plans& plans_for(int nr, int nc) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, Plans> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({nr, nc});
    if (it != cache.end()) return it->second;
    const std::size_t n_real = static_cast<std::size_t>(nr) * static_cast<std::size_t>(nc);
    const std::size_t n_cplx = static_cast<std::size_t>(nr) * static_cast<std::size_t>(nc / 2 + 1);
    auto* real = fftw_alloc_real(n_real);
    auto* cplx = fftw_alloc_complex(n_cplx);
    Plans p;
    p.forward = fftw_plan_dft_r2c_2d(nr, nc, real, cplx, FFTW_ESTIMATE);
    p.inverse = fftw_plan_dft_c2r_2d(nr, nc, cplx, real, FFTW_ESTIMATE);
    fftw_free(real);
    fftw_free(cplx);
    return cache.emplace(std::make_pair(nr, nc), p).first->second;
}

struct RealBuffer {
    explicit RealBuffer(std::size_t n) : data(fftw_alloc_real(n)) { std::memset(data, 0, n * sizeof(double)); }
    ~RealBuffer() { fftw_free(data); }
    RealBuffer(const RealBuffer&) = delete;
    RealBuffer& operator=(const RealBuffer&) = delete;
    double* data;
};

}  // namespace

void FftwDeleter::operator()(void* p) const { fftw_free(p); }

int fft_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

SpectralOperand::SpectralOperand(const Eigen::MatrixXd& m, int fft_rows, int fft_cols)
    : rows_(m.rows()), cols_(m.cols()), fft_rows_(fft_rows), fft_cols_(fft_cols) {
    if (rows_ > fft_rows || cols_ > fft_cols) throw InvalidInput("FFT grid smaller than the operand");
    const double mean = m.size() > 0 ? m.mean() : 0.0;
    const Eigen::MatrixXd c = m.array() - mean;

    sum_ = Eigen::MatrixXd::Zero(rows_ + 1, cols_ + 1);
    sum_sq_ = Eigen::MatrixXd::Zero(rows_ + 1, cols_ + 1);
    for (Eigen::Index j = 0; j < cols_; ++j)
        for (Eigen::Index i = 0; i < rows_; ++i) {
            const double v = c(i, j);
            sum_(i + 1, j + 1) = v + sum_(i, j + 1) + sum_(i + 1, j) - sum_(i, j);
            sum_sq_(i + 1, j + 1) = v * v + sum_sq_(i, j + 1) + sum_sq_(i + 1, j) - sum_sq_(i, j);
        }

    const std::size_t nr = static_cast<std::size_t>(fft_rows);
    const std::size_t nc = static_cast<std::size_t>(fft_cols);
    RealBuffer padded(nr * nc);
    for (Eigen::Index i = 0; i < rows_; ++i)
        for (Eigen::Index j = 0; j < cols_; ++j)
            padded.data[static_cast<std::size_t>(i) * nc + static_cast<std::size_t>(j)] = c(i, j);
    const std::size_t n_cplx = nr * (nc / 2 + 1);
    spectrum_.reset(reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_cplx)));
    fftw_execute_dft_r2c(plans_for(fft_rows, fft_cols).forward, padded.data,
                         reinterpret_cast<fftw_complex*>(spectrum_.get()));
}

CorrelationSurface correlation_surface(const SpectralOperand& a, const SpectralOperand& b, int lag,
                                       double min_overlap_fraction) {
    const int nr = a.fft_rows();
    const int nc = a.fft_cols();
    if (b.fft_rows() != nr || b.fft_cols() != nc) throw InvalidInput("operands live on different FFT grids");
    if (nr < std::max(a.rows(), b.rows()) + lag || nc < std::max(a.cols(), b.cols()) + lag)
        throw InvalidInput("FFT grid too small for the requested lag");

    // cross(di, dj) = sum_{r,c} a(r, c) b(r + di, c + dj) = IFFT(conj(Fa) Fb) at (di, dj).
    const std::size_t n_cplx = static_cast<std::size_t>(nr) * static_cast<std::size_t>(nc / 2 + 1);
    std::unique_ptr<std::complex<double>[], FftwDeleter> prod(
        reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n_cplx)));
    const auto* fa = a.spectrum();
    const auto* fb = b.spectrum();
    for (std::size_t k = 0; k < n_cplx; ++k) prod[k] = std::conj(fa[k]) * fb[k];
    RealBuffer cross(static_cast<std::size_t>(nr) * static_cast<std::size_t>(nc));
    fftw_execute_dft_c2r(plans_for(nr, nc).inverse, reinterpret_cast<fftw_complex*>(prod.get()), cross.data);
    const double scale = 1.0 / (static_cast<double>(nr) * static_cast<double>(nc));

    CorrelationSurface surf(lag);
    for (int di = -lag; di <= lag; ++di) {
        const auto rows = axis_overlap(a.rows(), b.rows(), di, min_overlap_fraction);
        if (!rows) continue;
        const std::size_t ri = static_cast<std::size_t>((di % nr + nr) % nr);
        for (int dj = -lag; dj <= lag; ++dj) {
            const auto cols = axis_overlap(a.cols(), b.cols(), dj, min_overlap_fraction);
            if (!cols) continue;
            const double n = static_cast<double>(rows->length * cols->length);
            const std::size_t ci = static_cast<std::size_t>((dj % nc + nc) % nc);
            const double sab = cross.data[ri * static_cast<std::size_t>(nc) + ci] * scale;
            const double sa = a.sum(rows->start, cols->start, rows->length, cols->length);
            const double sa2 = a.sum_sq(rows->start, cols->start, rows->length, cols->length);
            const double sb = b.sum(rows->start + di, cols->start + dj, rows->length, cols->length);
            const double sb2 = b.sum_sq(rows->start + di, cols->start + dj, rows->length, cols->length);
            const double va = sa2 - sa * sa / n;
            const double vb = sb2 - sb * sb / n;
            double r = 0.0;
            if (n >= 2 && va > kConstantVariance * n && vb > kConstantVariance * n)
                r = std::clamp((sab - sa * sb / n) / std::sqrt(va * vb), -1.0, 1.0);
            surf.set(Offset2D{di, dj}, r);
        }
    }
    return surf;
}

}  // namespace egotop::detail
