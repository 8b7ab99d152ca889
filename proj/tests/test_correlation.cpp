#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "egotop/correlation.hpp"
#include "support.hpp"

using namespace egotop;
using egotop::test::random_matrix;
using egotop::test::random_vector;

namespace {

// Pearson on explicitly copied blocks.
double pearson_oracle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double n = static_cast<double>(a.size());
    const double ma = a.sum() / n, mb = b.sum() / n;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.data()[i] - ma, y = b.data()[i] - mb;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if (saa / n < kConstantVariance || sbb / n < kConstantVariance) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

CorrConfig lag(int L, double frac = 0.5) {
    CorrConfig c;
    c.max_lag = L;
    c.min_overlap_fraction = frac;
    return c;
}

// Exhaustive scan with xcorr2_at and the documented tie order.
Corr2Max scan2(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const CorrConfig& cfg, bool diagonal) {
    Corr2Max best{-std::numeric_limits<double>::infinity(), {}};
    bool any = false;
    for (int di = -*cfg.max_lag; di <= *cfg.max_lag; ++di)
        for (int dj = -*cfg.max_lag; dj <= *cfg.max_lag; ++dj) {
            if (diagonal && di != dj) continue;
            double v;
            try {
                v = xcorr2_at(A, B, {di, dj}, cfg);
            } catch (const InsufficientOverlap&) {
                continue;
            }
            if (!any || improves(v, {di, dj}, best.value, best.offset)) best = {v, {di, dj}};
            any = true;
        }
    return best;
}

}  // namespace

TEST_CASE("xcorr2_at basics") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd A = random_matrix(20, 20, rng);
    CHECK(xcorr2_at(A, A, {0, 0}, lag(5)) == doctest::Approx(1.0));
    const Eigen::MatrixXd neg = (A.mean() - A.array()).matrix();
    CHECK(xcorr2_at(A, neg, {0, 0}, lag(5)) == doctest::Approx(-1.0));
    CHECK(xcorr2_at(Eigen::MatrixXd::Constant(20, 20, 2.0), A, {0, 0}, lag(5)) == 0.0);
}

TEST_CASE("xcorr2_at equals Pearson on hand-extracted blocks") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd A = random_matrix(20, 20, rng);
    const Eigen::MatrixXd B = random_matrix(20, 20, rng);
    // A(r, c) pairs with B(r + 3, c - 2): rows 0..16 of A, columns 2..19 of A.
    const Eigen::MatrixXd a = A.block(0, 2, 17, 18);
    const Eigen::MatrixXd b = B.block(3, 0, 17, 18);
    CHECK(xcorr2_at(A, B, {3, -2}, lag(5)) == doctest::Approx(pearson_oracle(a, b)).epsilon(1e-12));
}

TEST_CASE("too little overlap is an error") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd A = random_matrix(20, 20, rng);
    CHECK_THROWS_AS(xcorr2_at(A, A, {11, 0}, lag(15)), InsufficientOverlap);
    CHECK_THROWS_AS(xcorr1_at(random_vector(20, rng), random_vector(20, rng), -11, lag(15)), InsufficientOverlap);
}

TEST_CASE("planted 2D shift is found") {
    std::mt19937_64 rng(4);
    const Eigen::MatrixXd A = random_matrix(30, 30, rng);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(40, 40);
    B.block(5, 5, 30, 30) = A;
    const auto m = xcorr2_max(A, B, lag(8));
    CHECK(m.offset == Offset2D{5, 5});
    CHECK(m.value == doctest::Approx(1.0));

    const auto self = xcorr2_max(A, A, lag(6));
    CHECK(self.offset == Offset2D{0, 0});
    CHECK(self.value == doctest::Approx(1.0));
}

TEST_CASE("planted shifts up to half the lag are recovered exactly") {
    std::mt19937_64 rng(5);
    const int L = 10;
    const Eigen::MatrixXd big = random_matrix(60, 60, rng);
    const Eigen::MatrixXd A = big.block(15, 15, 30, 30);
    for (int di = -L / 2; di <= L / 2; ++di)
        for (int dj = -L / 2; dj <= L / 2; dj += 2) {
            const Eigen::MatrixXd B = big.block(15 - di, 15 - dj, 30, 30);
            CHECK(xcorr2_max(A, B, lag(L)).offset == Offset2D{di, dj});
        }
}

TEST_CASE("xcorr2_max equals an exhaustive scan") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 8; ++trial) {
        const Eigen::MatrixXd A = random_matrix(18 + trial, 22, rng);
        const Eigen::MatrixXd B = random_matrix(20, 19 + trial, rng);
        const auto cfg = lag(6);
        for (bool node : {false, true}) {
            const auto fast = xcorr2_max(A, B, cfg, node);
            const auto slow = scan2(A, B, cfg, node);
            CHECK(fast.offset == slow.offset);
            CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-10));
        }
    }
}

TEST_CASE("the FFT surface agrees with direct evaluation everywhere") {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd A = random_matrix(23, 17, rng);
    const Eigen::MatrixXd B = random_matrix(19, 21, rng);
    const auto cfg = lag(7);
    const auto s = correlation_surface(A, B, 7, cfg.min_overlap_fraction);
    for (int di = -7; di <= 7; ++di)
        for (int dj = -7; dj <= 7; ++dj) {
            bool ok = true;
            double v = 0;
            try {
                v = xcorr2_at(A, B, {di, dj}, cfg);
            } catch (const InsufficientOverlap&) {
                ok = false;
            }
            CHECK(s.admissible({di, dj}) == ok);
            if (ok) CHECK(std::abs(s.at({di, dj}) - v) < 1e-9);
        }
}

TEST_CASE("2D correlation properties") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> off(-5, 5);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd A = random_matrix(16, 16, rng);
        const Eigen::MatrixXd B = random_matrix(16, 16, rng);
        const auto cfg = lag(5);
        const auto best = xcorr2_max(A, B, cfg);
        for (int probe = 0; probe < 20; ++probe) {
            const Offset2D o{off(rng), off(rng)};
            const double v = xcorr2_at(A, B, o, cfg);
            CHECK(v == doctest::Approx(xcorr2_at(B, A, {-o.di, -o.dj}, cfg)).epsilon(1e-12));
            CHECK(best.value >= v - 1e-12);
            CHECK(std::abs(v) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("diagonal-only node search") {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd big = random_matrix(50, 50, rng);
    const Eigen::MatrixXd A = big.block(10, 10, 30, 30);
    const Eigen::MatrixXd B = big.block(7, 12, 30, 30);  // true offset (3, -2), off the diagonal
    auto cfg = lag(6);
    CHECK(xcorr2_max(A, B, cfg, false).offset == Offset2D{3, -2});
    const auto diag = xcorr2_max(A, B, cfg, true);
    CHECK(diag.offset.di == diag.offset.dj);
    cfg.diagonal_only_for_nodes = false;
    CHECK(xcorr2_max(A, B, cfg, true).offset == Offset2D{3, -2});
}

TEST_CASE("ties go to the smallest offset") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(10, 10, 1.0);
    const auto m = xcorr2_max(A, A, lag(3));
    CHECK(m.value == 0.0);
    CHECK(m.offset == Offset2D{0, 0});
    CHECK(offset_precedes({0, 1}, {1, 1}));
    CHECK(offset_precedes({-1, 0}, {0, 1}));
    CHECK(offset_precedes({0, -1}, {0, 1}));
}

TEST_CASE("1D correlation") {
    std::mt19937_64 rng(10);
    const Eigen::VectorXd u = random_vector(80, rng);
    const auto self = xcorr1_max(u, u, lag(10));
    CHECK(self.offset == 0);
    CHECK(self.value == doctest::Approx(1.0));

    // v(t) = u(t - 7): u(r) lines up with v(r + 7).
    Eigen::VectorXd v = random_vector(80, rng);
    v.tail(73) = u.head(73);
    CHECK(xcorr1_max(u, v, lag(10)).offset == 7);

    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd a = random_vector(40 + trial, rng);
        const Eigen::VectorXd b = random_vector(45, rng);
        const auto cfg = lag(9);
        Corr1Max best{-2.0, 0};
        for (int d = -9; d <= 9; ++d) {
            double x;
            try {
                x = xcorr1_at(a, b, d, cfg);
            } catch (const InsufficientOverlap&) {
                continue;
            }
            if (improves(x, {d, 0}, best.value, {best.offset, 0})) best = {x, d};
        }
        const auto fast = xcorr1_max(a, b, cfg);
        CHECK(fast.offset == best.offset);
        CHECK(fast.value == doctest::Approx(best.value).epsilon(1e-12));
        const auto prof = correlation_profile(a, b, 9, cfg.min_overlap_fraction);
        CHECK(prof(fast.offset + 9) == doctest::Approx(fast.value));
    }
}

TEST_CASE("default lag is a quarter of the shorter stream") {
    CorrConfig c;
    CHECK(c.lag_for(400) == 100);
    CHECK(c.lag_for(41) == 10);
    c.max_lag = -1;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}
