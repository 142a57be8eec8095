#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "effectlab/analytic.hpp"
#include "effectlab/common.hpp"
#include "effectlab/randomize.hpp"

using namespace effectlab;

namespace {

struct Fixture {
    Dataset ds;
    MlpModel model;
    std::vector<std::size_t> features;
    std::vector<Grid> grids;
};

Fixture make_fixture(std::size_t n = 300) {
    auto ds = gen_synthetic(n, 4, 0.2, LabelRule::linear, 21);
    auto tr = train_mlp(ds, {6, 4}, 60, 0.5, 22);
    std::vector<std::size_t> features{0, 1, 2};
    std::vector<Grid> grids;
    for (auto j : features) grids.push_back(make_grid(ds, j, 8, GridKind::quantile));
    return {std::move(ds), std::move(tr.model), std::move(features), std::move(grids)};
}

const RandomizationCell& cell_at(const RandomizationReport& rep, EffectKind kind,
                                 std::size_t stage) {
    for (const auto& c : rep.cells)
        if (c.kind == kind && c.stage == stage) return c;
    throw std::logic_error("missing cell");
}

}  // namespace

TEST_CASE("zero noise leaves everything unchanged") {
    auto fx = make_fixture(150);
    RandomizeConfig cfg;
    cfg.sigma = 0.0;
    cfg.repeats = 3;
    auto rep = randomization_test(fx.model, fx.ds, fx.features, fx.grids, cfg);
    double base = accuracy(fx.model, fx.ds);
    for (const auto& c : rep.cells) {
        CHECK(c.mean_distance == 0.0);
        CHECK(c.stderr_value == 0.0);
        CHECK(c.accuracy == Catch::Approx(base));
    }
    CHECK(rep.normalization == 0.0);
}

TEST_CASE("single repeat reports zero standard error") {
    auto fx = make_fixture(120);
    RandomizeConfig cfg;
    cfg.repeats = 1;
    cfg.sigma = 0.3;
    auto rep = randomization_test(fx.model, fx.ds, fx.features, fx.grids, cfg);
    for (const auto& c : rep.cells) CHECK(c.stderr_value == 0.0);
}

TEST_CASE("report structure") {
    auto fx = make_fixture(150);
    RandomizeConfig cfg;
    cfg.repeats = 4;
    cfg.sigma = 0.5;
    cfg.seed = 5;
    auto rep = randomization_test(fx.model, fx.ds, fx.features, fx.grids, cfg);
    const std::size_t stages = fx.model.num_layers() + 1;
    REQUIRE(rep.cells.size() == 3 * stages);

    SECTION("stage zero is the identity") {
        for (auto kind : {EffectKind::pd, EffectKind::cd, EffectKind::dale}) {
            CHECK(cell_at(rep, kind, 0).mean_distance == 0.0);
            CHECK(cell_at(rep, kind, 0).layer_name == "-");
        }
    }
    SECTION("last-layer-first naming") {
        CHECK(cell_at(rep, EffectKind::pd, 1).layer_name ==
              "layer" + std::to_string(fx.model.num_layers() - 1));
        CHECK(cell_at(rep, EffectKind::pd, fx.model.num_layers()).layer_name == "layer0");
    }
    SECTION("normalization maps the max cell to one and keeps order") {
        double top = 0.0;
        for (const auto& c : rep.cells) top = std::max(top, c.mean_distance);
        CHECK(top == Catch::Approx(1.0));
        CHECK(rep.normalization > 0.0);
    }
    SECTION("deterministic under the master seed") {
        auto again = randomization_test(fx.model, fx.ds, fx.features, fx.grids, cfg);
        REQUIRE(again.cells.size() == rep.cells.size());
        for (std::size_t k = 0; k < rep.cells.size(); ++k) {
            CHECK(again.cells[k].mean_distance == rep.cells[k].mean_distance);
            CHECK(again.cells[k].accuracy == rep.cells[k].accuracy);
        }
    }
    SECTION("strong noise on every layer destroys accuracy") {
        double base = accuracy(fx.model, fx.ds);
        double final_acc = cell_at(rep, EffectKind::pd, fx.model.num_layers()).accuracy;
        CHECK(final_acc < base);
    }
}

TEST_CASE("feature filtering") {
    auto fx = make_fixture(100);
    // append a binary column by rebuilding the dataset
    std::vector<double> values;
    for (std::size_t i = 0; i < fx.ds.n(); ++i) {
        for (std::size_t j = 0; j < fx.ds.p(); ++j) values.push_back(fx.ds.at(i, j));
        values.push_back(i % 2 ? 1.0 : 0.0);
    }
    auto names = fx.ds.feature_names();
    names.push_back("onehot");
    Dataset with_binary(values, names, {},
                        std::vector<int>(fx.ds.labels().begin(), fx.ds.labels().end()));
    auto tr = train_mlp(with_binary, {4}, 20, 0.5, 30);

    std::vector<std::size_t> features{0, 4};
    std::vector<Grid> grids{make_grid(with_binary, 0, 6, GridKind::quantile),
                            Grid{{0.0, 1.0}, GridKind::equidistant}};
    RandomizeConfig cfg;
    cfg.repeats = 2;
    auto rep = randomization_test(tr.model, with_binary, features, grids, cfg);
    CHECK(rep.features_used == std::vector<std::size_t>{0});
    CHECK(rep.features_filtered == std::vector<std::size_t>{4});

    std::vector<std::size_t> only_binary{4};
    std::vector<Grid> only_grid{Grid{{0.0, 1.0}, GridKind::equidistant}};
    CHECK_THROWS(randomization_test(tr.model, with_binary, only_binary, only_grid, cfg));
}

TEST_CASE("sigma sweep") {
    auto fx = make_fixture(150);
    RandomizeConfig cfg;
    cfg.repeats = 6;
    cfg.seed = 9;

    SECTION("zero-only sweep is all zero") {
        auto reports = sigma_sweep(fx.model, fx.ds, fx.features, fx.grids, {0.0}, cfg);
        REQUIRE(reports.size() == 1);
        for (const auto& c : reports[0].cells) CHECK(c.mean_distance == 0.0);
    }
    SECTION("more noise means more explanation change and less accuracy") {
        auto reports = sigma_sweep(fx.model, fx.ds, fx.features, fx.grids, {0.05, 0.5}, cfg);
        REQUIRE(reports.size() == 2);
        const std::size_t last = fx.model.num_layers();
        // compare raw (unnormalized) distances across reports
        double small = cell_at(reports[0], EffectKind::pd, last).mean_distance *
                       reports[0].normalization;
        double large = cell_at(reports[1], EffectKind::pd, last).mean_distance *
                       reports[1].normalization;
        CHECK(large >= small);
        double acc_small = cell_at(reports[0], EffectKind::pd, last).accuracy;
        double acc_large = cell_at(reports[1], EffectKind::pd, last).accuracy;
        CHECK(acc_large <= acc_small + 0.02);
    }
}
