#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "egotop/delay_opt.hpp"
#include "support.hpp"

using namespace egotop;

namespace {

CorrConfig lag(int L) {
    CorrConfig c;
    c.max_lag = L;
    return c;
}

struct Fixture {
    test::Built b;
    AffinityBank bank;
};

Fixture fixture(std::uint64_t seed, std::size_t nt, std::size_t ne, std::vector<int> delays, int L = 12) {
    auto cfg = test::small_scene(seed, nt, ne, 100);
    cfg.true_delays = std::move(delays);
    auto b = test::build(cfg);
    AffinityBank bank(b.graphs.ego, b.graphs.top, FeatureConfig{}, lag(L));
    return {std::move(b), std::move(bank)};
}

double objective(const AffinityBank& bank, const std::vector<int>& t, Objective o) {
    const auto m = spectral_match(bank.fixed(t));
    return o == Objective::Spectral ? m.eigen.lambda : m.score;
}

}  // namespace

TEST_CASE("zero initialisation") {
    const auto t = init_delays_zero(4, 2);
    CHECK(t.delays == std::vector<int>(4, 0));
    CHECK(t.step_frames == 2);
}

TEST_CASE("median initialisation is the lower median of the suggestions") {
    const auto f = fixture(1, 3, 3, {4, -3, 0});
    const auto t = init_delays_median(f.bank);
    for (std::size_t i = 0; i < 3; ++i) {
        auto s = f.bank.delay_suggestions(i);
        REQUIRE(s.size() == 3 + 2 * 3 * 2);  // one per top node plus one per ordered top pair and other video
        std::sort(s.begin(), s.end());
        CHECK(t.delays[i] == s[(s.size() - 1) / 2]);
    }
    const auto snapped = init_delays_median(f.bank, 5);
    for (int d : snapped.delays) {
        CHECK(d % 5 == 0);
        CHECK(std::abs(d) <= f.bank.max_lag());
    }
    CHECK_THROWS_AS(init_delays_median(f.bank, 0), InvalidInput);
}

TEST_CASE("ascent traces increase and record what they claim") {
    const auto f = fixture(2, 3, 3, {6, -5, 2});
    for (auto o : {Objective::Spectral, Objective::MatchingScore}) {
        OptimizerConfig oc;
        oc.objective = o;
        const auto r = optimize(f.bank, init_delays_zero(3), oc);
        const auto& e = r.trace.entries;
        REQUIRE_FALSE(e.empty());
        CHECK(e.front().delays == std::vector<int>(3, 0));
        for (std::size_t k = 0; k < e.size(); ++k) {
            CHECK(e[k].objective == doctest::Approx(objective(f.bank, e[k].delays, o)).epsilon(1e-12));
            if (k > 0) {
                CHECK(e[k].objective > e[k - 1].objective + oc.epsilon);
                int moved = 0;
                for (std::size_t i = 0; i < 3; ++i) moved += std::abs(e[k].delays[i] - e[k - 1].delays[i]);
                CHECK(moved == 1);
            }
        }
        CHECK(r.delays.delays == e.back().delays);
        CHECK(r.trace.termination == Termination::LocalMax);
        for (int d : r.delays.delays) CHECK(std::abs(d) <= f.bank.max_lag());
        // No single step improves on the end point.
        for (std::size_t i = 0; i < 3; ++i)
            for (int dir : {-1, 1}) {
                auto t = r.delays.delays;
                t[i] += dir;
                if (std::abs(t[i]) > f.bank.max_lag()) continue;
                CHECK(objective(f.bank, t, o) <= e.back().objective + oc.epsilon);
            }
    }
}

TEST_CASE("starting at a local maximum stops at once") {
    const auto f = fixture(3, 3, 2, {3, -2});
    OptimizerConfig oc;
    const auto first = optimize(f.bank, init_delays_median(f.bank), oc);
    const auto again = optimize(f.bank, first.delays, oc);
    CHECK(again.trace.entries.size() == 1);
    CHECK(again.trace.iterations == 1);
    CHECK(again.trace.termination == Termination::LocalMax);
    CHECK(again.delays.delays == first.delays.delays);
    CHECK(again.hard.columns == first.hard.columns);
}

TEST_CASE("the iteration cap ends the search") {
    const auto f = fixture(4, 3, 3, {9, -8, 7});
    OptimizerConfig oc;
    oc.itr_max = 2;
    const auto r = optimize(f.bank, init_delays_zero(3), oc);
    CHECK(r.trace.iterations <= 2);
    CHECK(r.trace.entries.size() <= 3);
    if (r.trace.entries.size() == 3) CHECK(r.trace.termination == Termination::IterationLimit);
    oc.itr_max = 0;
    CHECK_THROWS_AS(optimize(f.bank, init_delays_zero(3), oc), InvalidInput);
}

TEST_CASE("optimisation is deterministic") {
    const auto f = fixture(5, 3, 3, {2, 4, -6});
    OptimizerConfig oc;
    const auto a = optimize(f.bank, init_delays_median(f.bank), oc);
    const auto b = optimize(f.bank, init_delays_median(f.bank), oc);
    CHECK(a.delays.delays == b.delays.delays);
    CHECK(a.score == b.score);
    CHECK(a.hard.columns == b.hard.columns);
    CHECK(a.soft.P == b.soft.P);
}

TEST_CASE("a single ego video is handled") {
    const auto f = fixture(6, 3, 1, {5});
    for (auto o : {Objective::Spectral, Objective::MatchingScore}) {
        OptimizerConfig oc;
        oc.objective = o;
        const auto r = optimize(f.bank, init_delays_median(f.bank), oc);
        REQUIRE(r.hard.columns.size() == 1);
        CHECK(r.hard.columns[0] < 3);
        CHECK(r.soft.P.rows() == 1);
        CHECK(r.score >= 0.0);
    }
}

TEST_CASE("steps larger than one frame stay on the grid") {
    const auto f = fixture(7, 3, 2, {4, -4});
    OptimizerConfig oc;
    oc.step_frames = 2;
    const auto r = optimize(f.bank, init_delays_median(f.bank, 2), oc);
    for (const auto& e : r.trace.entries)
        for (int d : e.delays) CHECK(d % 2 == 0);
}

TEST_CASE("a featureless ego view gives a zero affinity") {
    auto b = test::build(test::small_scene(8, 3, 2, 60));
    std::vector<EgoVideo> flat;
    for (std::size_t k = 0; k < 2; ++k)
        flat.push_back(EgoVideo{ego_video_id(k), Eigen::MatrixXd::Constant(60, 8, 0.5), Eigen::VectorXd::Zero(60), 10.0});
    const auto ego = build_ego_graph(flat, FeatureConfig{});
    const AffinityBank bank(ego, b.graphs.top, FeatureConfig{}, lag(10));
    CHECK(bank.fixed(std::vector<int>{0, 0}).data.isZero(0.0));
    CHECK_THROWS_AS(optimize(bank, init_delays_zero(2), OptimizerConfig{}), ZeroMatrix);
    const auto m = spectral_match(bank.free());
    CHECK(m.eigen.lambda == 0.0);
    CHECK(m.score == 0.0);
    CHECK(m.hard.columns == std::vector<std::size_t>{0, 1});
}

TEST_CASE("delays must match the ego count") {
    const auto f = fixture(9, 3, 2, {0, 0});
    CHECK_THROWS_AS(optimize(f.bank, init_delays_zero(3), OptimizerConfig{}), DimensionMismatch);
}
