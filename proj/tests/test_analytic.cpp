#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "effectlab/analytic.hpp"
#include "effectlab/common.hpp"
#include "effectlab/effects.hpp"

using namespace effectlab;

TEST_CASE("xor pd under a uniform second feature") {
    CHECK(xor_pd_uniform(-1, 1, 1.0) == 0.5);
    CHECK(xor_pd_uniform(0, 2, 1.0) == 1.0);
    CHECK(xor_pd_uniform(-3, 1, -1.0) == 0.75);
    CHECK_THROWS(xor_pd_uniform(0, 0, 1.0));
    CHECK_THROWS(xor_pd_uniform(0.5, 1.0, 1.0));

    SECTION("the two branches are complementary probabilities") {
        Rng rng(1);
        for (int t = 0; t < 100; ++t) {
            double a = -rng.uniform(0.0, 5.0), b = rng.uniform(0.01, 5.0);
            double up = xor_pd_uniform(a, b, 1.0), down = xor_pd_uniform(a, b, -1.0);
            CHECK(up >= 0.0);
            CHECK(up <= 1.0);
            CHECK(up + down == Catch::Approx(1.0));
        }
    }
    SECTION("monte-carlo agreement at a million draws") {
        Rng rng(2);
        double a = -3, b = 1;
        std::size_t hits = 0, n = 1000000;
        for (std::size_t i = 0; i < n; ++i)
            if (-1.0 * rng.uniform(a, b) > 0) ++hits;
        CHECK(std::abs(double(hits) / n - xor_pd_uniform(a, b, -1.0)) <= 0.002);
    }
}

TEST_CASE("xor pd under a normal second feature") {
    CHECK(xor_pd_normal(0, 1, 1.0) == 0.5);
    CHECK(xor_pd_normal(0, 1, -1.0) == 0.5);
    CHECK(xor_pd_normal(1, 1, 1.0) == Catch::Approx(0.841344746068543).epsilon(1e-12));
    CHECK(xor_pd_normal(40, 1, 1.0) == Catch::Approx(1.0));
    CHECK_THROWS(xor_pd_normal(0, 0, 1.0));

    SECTION("monte-carlo agreement") {
        Rng rng(3);
        std::size_t hits = 0, n = 1000000;
        for (std::size_t i = 0; i < n; ++i)
            if (rng.normal(1.0, 1.0) > 0) ++hits;
        CHECK(std::abs(double(hits) / n - xor_pd_normal(1, 1, 1.0)) <= 0.002);
    }
}

TEST_CASE("pd estimator on the xor model converges to the closed form") {
    Rng rng(4);
    const std::size_t n = 10000;
    const double a = -2.0, b = 1.5;
    std::vector<double> values(n * 2);
    for (std::size_t i = 0; i < n; ++i) {
        values[i * 2] = i % 2 ? 1.0 : -1.0;
        values[i * 2 + 1] = rng.uniform(a, b);
    }
    Dataset ds(std::move(values), {"x1", "x2"}, {{-1.0, 1.0}, {a, b}});
    XorModel m;
    Grid grid{{-1.0, 1.0}, GridKind::equidistant};
    auto curve = pd(m, ds, FeatureSet::single(0), grid);
    double tol = 3.0 / std::sqrt(double(n));
    CHECK(std::abs(curve.values[1] - xor_pd_uniform(a, b, 1.0)) <= tol);
    CHECK(std::abs(curve.values[0] - xor_pd_uniform(a, b, -1.0)) <= tol);
}

TEST_CASE("linear oracles equal the estimators to numerical precision") {
    auto ds = gen_synthetic(300, 3, 0.4, LabelRule::linear, 5);
    std::vector<double> w{1.5, -2.0, 0.5};
    LinearModel m(w, 0.75);
    for (auto kind : {GridKind::quantile, GridKind::equidistant}) {
        Grid grid = make_grid(ds, 1, 7, kind);
        FeatureSet s({1});
        auto pd_est = pd(m, ds, s, grid);
        auto pd_ref = linear_pd(w, 0.75, ds, s, grid);
        auto ale_est = ale(m, ds, 1, grid);
        auto ale_ref = linear_ale_uncentered(w, 1, grid.points.front(), grid);
        for (bool flagged : ale_est.meta.flagged)
            REQUIRE_FALSE(flagged);  // telescoping needs every bin populated
        for (std::size_t k = 0; k < grid.size(); ++k) {
            CHECK(std::abs(pd_est.values[k] - pd_ref.values[k]) <= 1e-12);
            CHECK(std::abs(ale_est.values[k] - ale_ref.values[k]) <= 1e-12);
        }
    }
    SECTION("flat pd when the weight is zero") {
        Grid grid = make_grid(ds, 0, 4, GridKind::equidistant);
        auto ref = linear_pd({0.0, 1.0, 1.0}, 0.5, ds, FeatureSet::single(0), grid);
        for (std::size_t k = 1; k < grid.size(); ++k)
            CHECK(ref.values[k] == Catch::Approx(ref.values[0]));
    }
}

TEST_CASE("synthetic generator") {
    SECTION("zero correlation stays near zero in the sample") {
        const std::size_t n = 4000;
        auto ds = gen_synthetic(n, 3, 0.0, LabelRule::linear, 6);
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = a + 1; b < 3; ++b) {
                auto ca = ds.column(a), cb = ds.column(b);
                double ma = mean(ca), mb = mean(cb);
                double cov = 0, va = 0, vb = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    cov += (ca[i] - ma) * (cb[i] - mb);
                    va += (ca[i] - ma) * (ca[i] - ma);
                    vb += (cb[i] - mb) * (cb[i] - mb);
                }
                double corr = cov / std::sqrt(va * vb);
                CHECK(std::abs(corr) <= 3.0 / std::sqrt(double(n)));
            }
        }
    }
    SECTION("positive correlation shows up in the sample") {
        auto ds = gen_synthetic(4000, 4, 0.6, LabelRule::linear, 7);
        auto ca = ds.column(0), cb = ds.column(2);
        double ma = mean(ca), mb = mean(cb);
        double cov = 0, va = 0, vb = 0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            cov += (ca[i] - ma) * (cb[i] - mb);
            va += (ca[i] - ma) * (ca[i] - ma);
            vb += (cb[i] - mb) * (cb[i] - mb);
        }
        CHECK(cov / std::sqrt(va * vb) == Catch::Approx(0.6).margin(0.05));
    }
    SECTION("deterministic under seed") {
        auto a = gen_synthetic(100, 5, 0.3, LabelRule::xor_sign, 8);
        auto b = gen_synthetic(100, 5, 0.3, LabelRule::xor_sign, 8);
        CHECK(a.values() == b.values());
        CHECK(a.labels() == b.labels());
        auto c = gen_synthetic(100, 5, 0.3, LabelRule::xor_sign, 9);
        CHECK(a.values() != c.values());
    }
    SECTION("full-scale generation runs") {
        auto ds = gen_synthetic(5000, 20, 0.0, LabelRule::linear, 10);
        CHECK(ds.n() == 5000);
        CHECK(ds.p() == 20);
        CHECK(ds.has_labels());
    }
    SECTION("infeasible negative correlation is rejected") {
        CHECK_THROWS(gen_synthetic(100, 10, -0.5, LabelRule::linear, 11));
        CHECK_THROWS(gen_synthetic(10, 2, 1.5, LabelRule::linear, 11));
    }
}
