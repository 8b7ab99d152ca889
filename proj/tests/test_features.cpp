#include <doctest.h>

#include <cmath>
#include <random>

#include "egotop/features.hpp"
#include "support.hpp"

using namespace egotop;
using egotop::test::line;
using egotop::test::wander;

namespace {

GeometryConfig geo(double range = 6.0) {
    GeometryConfig g;
    g.range_m = range;
    return g;
}

EgoVideo video(const std::string& id, const Eigen::MatrixXd& d) {
    return EgoVideo{id, d, Eigen::VectorXd::LinSpaced(d.rows(), 0.0, 1.0), 10.0};
}

}  // namespace

TEST_CASE("gist similarity") {
    Eigen::VectorXd a(3), b(3);
    a << 0.1, 0.2, 0.3;
    CHECK(gist_similarity(a, a, 0.5) == 1.0);
    b = a;
    b(0) += 1.0;
    CHECK(gist_similarity(a, b, 0.5) == doctest::Approx(std::exp(-0.5)));
    CHECK(gist_similarity(a, b, 0.5) == doctest::Approx(0.6065).epsilon(1e-4));

    std::mt19937_64 rng(1);
    double prev = 1.0;
    for (int s = 1; s <= 20; ++s) {
        Eigen::VectorXd c = a;
        c(1) += 0.1 * s;
        const double v = gist_similarity(a, c, 0.5);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(gist_similarity(a, Eigen::VectorXd::Zero(4), 0.5), DimensionMismatch);
}

TEST_CASE("top graph of a steady walker has a bright diagonal band") {
    std::vector<Trajectory> ts{line("a", {0, 0}, {0.05, 0}, 60)};
    const auto g = build_top_graph(ts, geo(), FeatureConfig{});
    const auto& U = g.node(0);
    for (Eigen::Index p = 0; p + 1 < U.rows(); ++p) {
        CHECK(U(p, p) == 1.0);
        CHECK(U(p, p + 1) > 0.9);
    }
}

TEST_CASE("lockstep viewers give an edge matrix with unit diagonal") {
    std::vector<Trajectory> ts{line("a", {0, 0}, {0.05, 0.02}, 40), line("b", {0, 0}, {0.05, 0.02}, 40)};
    const auto g = build_top_graph(ts, geo(), FeatureConfig{});
    const auto& B = g.edge_upper(0, 1);
    for (Eigen::Index p = 0; p < B.rows(); ++p) CHECK(B(p, p) == 1.0);
}

TEST_CASE("top graph entries equal direct cone IOU recomputation") {
    std::mt19937_64 rng(2);
    std::vector<Trajectory> ts{wander("a", 30, rng), wander("b", 30, rng), wander("c", 30, rng)};
    const auto gc = geo();
    const auto g = build_top_graph(ts, gc, FeatureConfig{});
    REQUIRE(g.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const auto M = g.edge(i, j);
            for (Eigen::Index p = 0; p < 30; ++p)
                for (Eigen::Index q = 0; q < 30; ++q)
                    CHECK(M(p, q) == cone_iou(cone_at(ts[i], static_cast<std::size_t>(p), gc),
                                              cone_at(ts[j], static_cast<std::size_t>(q), gc), gc));
        }
    // Node matrices are symmetric with unit diagonal, edges are transposes of each other.
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(g.node(i) == g.node(i).transpose());
        CHECK(g.node(i).diagonal().isOnes(0.0));
        CHECK(g.node(i).minCoeff() >= 0.0);
        CHECK(g.node(i).maxCoeff() <= 1.0);
    }
    CHECK(g.edge(2, 0) == g.edge(0, 2).transpose());
}

TEST_CASE("top graph counts are z-normalised counts of other viewers in the cone") {
    std::mt19937_64 rng(4);
    std::vector<Trajectory> ts{wander("a", 40, rng), wander("b", 40, rng), wander("c", 40, rng), wander("d", 40, rng)};
    const auto gc = geo();
    const auto g = build_top_graph(ts, gc, FeatureConfig{});
    Eigen::VectorXd raw(40);
    for (std::size_t t = 0; t < 40; ++t) {
        std::vector<Point2> others{ts[1].positions[t], ts[2].positions[t], ts[3].positions[t]};
        raw(static_cast<Eigen::Index>(t)) = static_cast<double>(count_in_cone(cone_at(ts[0], t, gc), others));
    }
    CHECK((g.counts(0) - z_normalize(raw)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trajectories of different length are rejected") {
    std::vector<Trajectory> ts{line("a", {0, 0}, {0.1, 0}, 20), line("b", {0, 0}, {0.1, 0}, 21)};
    CHECK_THROWS_AS(build_top_graph(ts, geo(), FeatureConfig{}), MismatchedLengths);
}

TEST_CASE("ego graph") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd d1 = test::random_matrix(25, 8, rng);
    const Eigen::MatrixXd d2 = test::random_matrix(25, 8, rng);
    FeatureConfig cfg;

    SUBCASE("a video paired with itself") {
        std::vector<EgoVideo> vs{video("a", d1), video("b", d1)};
        const auto g = build_ego_graph(vs, cfg);
        CHECK((g.edge_upper(0, 1) - g.node(0)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("constant descriptors") {
        const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(10, 8, 0.3);
        std::vector<EgoVideo> vs{video("a", c)};
        CHECK(build_ego_graph(vs, cfg).node(0).isOnes(0.0));
    }
    SUBCASE("pointwise similarity of normalised descriptors") {
        std::vector<EgoVideo> vs{video("a", d1), video("b", d2)};
        const auto g = build_ego_graph(vs, cfg);
        for (Eigen::Index p = 0; p < 25; ++p)
            for (Eigen::Index q = 0; q < 25; ++q) {
                const Eigen::VectorXd x = d1.row(p).transpose().normalized();
                const Eigen::VectorXd y = d2.row(q).transpose().normalized();
                CHECK(g.edge_upper(0, 1)(p, q) == doctest::Approx(std::exp(-0.5 * (x - y).norm())).epsilon(1e-14));
                CHECK(g.node(0)(p, q) == g.node(0)(q, p));
            }
        CHECK(g.node(1).diagonal().isOnes(0.0));
        CHECK(g.edge(1, 0) == g.edge(0, 1).transpose());
    }
    SUBCASE("dimension mismatches") {
        std::vector<EgoVideo> vs{video("a", d1), video("b", test::random_matrix(25, 7, rng))};
        CHECK_THROWS_AS(build_ego_graph(vs, cfg), DimensionMismatch);
        EgoVideo bad = video("c", d1);
        bad.counts = Eigen::VectorXd::Zero(3);
        std::vector<EgoVideo> vb{bad};
        CHECK_THROWS_AS(build_ego_graph(vb, cfg), DimensionMismatch);
    }
}

TEST_CASE("detection ingestion") {
    FeatureConfig cfg;  // min_box_fraction 0.04
    CHECK(ingest_detections(std::vector<DetectionRecord>{}, 5, cfg).isZero(0.0));

    std::vector<DetectionRecord> single{{2, -3.7, 0.5}};
    const auto s = ingest_detections(single, 5, cfg);
    CHECK(s(2) == 1.0);
    CHECK(s.sum() == 1.0);

    // Hand trace: rows 3 and 7 are too small; survivors have scores in [0.2, 1.0].
    std::vector<DetectionRecord> rows{{0, 0.2, 0.10}, {0, 0.6, 0.20}, {1, 1.0, 0.05}, {1, 5.0, 0.01},
                                      {2, 0.4, 0.30}, {2, 0.8, 0.04}, {2, 0.6, 0.50}, {3, 0.9, 0.03},
                                      {4, 0.2, 0.06}, {4, 1.0, 0.90}};
    const auto c = ingest_detections(rows, 6, cfg);
    Eigen::VectorXd expect(6);
    expect << 0.0 + 0.5, 1.0, 0.25 + 0.75 + 0.5, 0.0, 0.0 + 1.0, 0.0;
    CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index f = 0; f < 6; ++f) {
        std::size_t n = 0;
        for (const auto& r : rows) n += static_cast<Eigen::Index>(r.frame) == f;
        CHECK(c(f) >= 0.0);
        CHECK(c(f) <= static_cast<double>(n));
    }
    std::vector<DetectionRecord> late{{9, 1.0, 0.5}};
    CHECK_THROWS_AS(ingest_detections(late, 5, cfg), InvalidInput);
}

TEST_CASE("resampling") {
    std::mt19937_64 rng(9);
    const Eigen::VectorXd v = test::random_vector(100, rng);
    CHECK(resample(v, 10.0, 10.0) == v);

    const auto half = resample(v, 30.0, 15.0);
    REQUIRE(half.size() == 50);
    for (Eigen::Index t = 0; t < 50; ++t) CHECK(half(t) == v(2 * t));

    const auto up = resample(v, 24.0, 30.0);
    REQUIRE(up.size() == 125);
    for (Eigen::Index t = 0; t < up.size(); ++t) {
        const auto src = std::min<Eigen::Index>(99, std::llround(static_cast<double>(t) * 24.0 / 30.0));
        CHECK(up(t) == v(src));
    }

    const Eigen::MatrixXd m = test::random_matrix(40, 40, rng);
    const auto m2 = resample(m, 20.0, 10.0);
    REQUIRE(m2.rows() == 20);
    CHECK(m2(3, 7) == m(6, 14));
}

TEST_CASE("normalisation helpers") {
    Eigen::VectorXd v(4);
    v << 1, 2, 3, 4;
    const auto z = z_normalize(v);
    CHECK(z.mean() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(z.squaredNorm() / 4 == doctest::Approx(1.0));
    CHECK(z_normalize(Eigen::VectorXd::Constant(5, 2.0)).isZero(0.0));

    Eigen::MatrixXd m(2, 2);
    m << 3, 4, 0, 0;
    const auto n = l2_normalize_rows(m);
    CHECK(n(0, 0) == doctest::Approx(0.6));
    CHECK(n.row(1).isZero(0.0));
}

TEST_CASE("graph subsets and truncation share and trim the matrices") {
    std::mt19937_64 rng(6);
    std::vector<Trajectory> ts{wander("a", 30, rng), wander("b", 30, rng), wander("c", 30, rng)};
    const auto g = build_top_graph(ts, geo(), FeatureConfig{});
    const std::vector<std::size_t> pick{2, 0};
    const auto s = g.subset(pick);
    CHECK(s.node_ids() == std::vector<std::string>{"c", "a"});
    CHECK(s.edge(0, 1) == g.edge(2, 0));
    const auto t = g.truncated(20);
    CHECK(t.frames(1) == 20);
    CHECK(t.edge(0, 1) == g.edge(0, 1).topLeftCorner(20, 20));
}
