#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "effectlab/common.hpp"
#include "effectlab/dataset.hpp"
#include "effectlab/effects.hpp"
#include "effectlab/grid.hpp"
#include "effectlab/mlp.hpp"

namespace effectlab {

struct RandomizeConfig {
    double sigma = 0.5;
    std::size_t repeats = 20;
    std::uint64_t seed = 0;
    CurveMetric metric = CurveMetric::max_abs;
    bool weights_only = false;
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // NaN = per-feature default
};

struct RandomizationCell {
    EffectKind kind = EffectKind::pd;
    std::size_t stage = 0;          // number of layers perturbed, counted from the end
    std::string layer_name;         // layer newly perturbed at this stage, "-" for stage 0
    double mean_distance = 0.0;     // normalized per report
    double stderr_value = 0.0;      // normalized with the same constant
    double accuracy = 0.0;          // mean accuracy over repeats at this stage
};

struct RandomizationReport {
    std::vector<RandomizationCell> cells;
    double sigma = 0.0;
    std::size_t repeats = 0;
    double normalization = 1.0;  // max raw mean distance over all cells
    std::vector<std::size_t> features_used;
    std::vector<std::size_t> features_filtered;  // <= 2 unique values
    bool weights_only = false;
};

// Cumulative last-layer-first weight randomization. For each repeat, one more
// layer is perturbed per stage (with the noise of earlier stages kept), and
// the pd/cd/dale curves of every feature are compared against the unperturbed
// ones. Mean distances are normalized by the largest (kind, stage) cell.
inline RandomizationReport randomization_test(const MlpModel& m, const Dataset& ds,
                                              const std::vector<std::size_t>& features,
                                              const std::vector<Grid>& grids,
                                              const RandomizeConfig& cfg = RandomizeConfig{}) {
    if (features.empty()) throw std::invalid_argument("randomization_test: no features");
    if (features.size() != grids.size())
        throw std::invalid_argument("randomization_test: need one grid per feature");
    if (cfg.repeats < 1) throw std::invalid_argument("randomization_test: repeats >= 1");

    RandomizationReport rep;
    rep.sigma = cfg.sigma;
    rep.repeats = cfg.repeats;
    rep.weights_only = cfg.weights_only;

    // effects are only meaningful for features with more than 2 unique values
    std::vector<std::size_t> kept;
    std::vector<Grid> kept_grids;
    for (std::size_t f = 0; f < features.size(); ++f) {
        auto col = ds.column(features[f]);
        std::set<double> uniq(col.begin(), col.end());
        if (uniq.size() > 2) {
            kept.push_back(features[f]);
            kept_grids.push_back(grids[f]);
        } else {
            rep.features_filtered.push_back(features[f]);
        }
    }
    if (kept.empty())
        throw std::invalid_argument("randomization_test: every feature has <= 2 unique values");
    rep.features_used = kept;

    const std::size_t num_layers = m.num_layers();
    const std::array<EffectKind, 3> kinds = {EffectKind::pd, EffectKind::cd, EffectKind::dale};

    auto curves_for = [&](const MlpModel& model) {
        std::vector<std::vector<ExplanationCurve>> out(kinds.size());
        for (std::size_t f = 0; f < kept.size(); ++f) {
            double eps =
                std::isfinite(cfg.epsilon) ? cfg.epsilon : default_epsilon(ds, kept[f]);
            out[0].push_back(pd(model, ds, FeatureSet::single(kept[f]), kept_grids[f]));
            out[1].push_back(cd(model, ds, FeatureSet::single(kept[f]), kept_grids[f], eps));
            out[2].push_back(dale(model, ds, kept[f], kept_grids[f]));
        }
        return out;
    };
    const auto baseline = curves_for(m);
    const double base_accuracy =
        ds.has_labels() ? accuracy(m, ds) : std::numeric_limits<double>::quiet_NaN();

    // distance[kind][stage][repeat], accuracy_runs[stage][repeat]
    std::vector<std::vector<std::vector<double>>> dist(
        kinds.size(), std::vector<std::vector<double>>(num_layers + 1,
                                                       std::vector<double>(cfg.repeats, 0.0)));
    std::vector<std::vector<double>> acc_runs(num_layers + 1,
                                              std::vector<double>(cfg.repeats, base_accuracy));

    parallel_for(cfg.repeats, [&](std::size_t r) {
        MlpModel current = m;
        for (std::size_t stage = 1; stage <= num_layers; ++stage) {
            std::size_t layer = num_layers - stage;
            std::uint64_t noise_seed = derive_seed(derive_seed(cfg.seed, r), stage);
            current = perturb_layer(current, layer, cfg.sigma, noise_seed, cfg.weights_only);
            auto curves = curves_for(current);
            for (std::size_t k = 0; k < kinds.size(); ++k) {
                double acc = 0.0;
                for (std::size_t f = 0; f < kept.size(); ++f)
                    acc += curve_distance(baseline[k][f], curves[k][f], cfg.metric);
                dist[k][stage][r] = acc / static_cast<double>(kept.size());
            }
            if (ds.has_labels()) acc_runs[stage][r] = accuracy(current, ds);
        }
    });

    // aggregate, then normalize every cell by the largest mean distance
    double max_mean = 0.0;
    std::vector<std::vector<double>> means(kinds.size()), errs(kinds.size());
    for (std::size_t k = 0; k < kinds.size(); ++k) {
        means[k].resize(num_layers + 1);
        errs[k].resize(num_layers + 1);
        for (std::size_t stage = 0; stage <= num_layers; ++stage) {
            means[k][stage] = mean(dist[k][stage]);
            errs[k][stage] = standard_error(dist[k][stage]);
            max_mean = std::max(max_mean, means[k][stage]);
        }
    }
    rep.normalization = max_mean;
    const double denom = max_mean > 0.0 ? max_mean : 1.0;

    for (std::size_t k = 0; k < kinds.size(); ++k) {
        for (std::size_t stage = 0; stage <= num_layers; ++stage) {
            RandomizationCell cell;
            cell.kind = kinds[k];
            cell.stage = stage;
            cell.layer_name =
                stage == 0 ? "-" : "layer" + std::to_string(num_layers - stage);
            cell.mean_distance = means[k][stage] / denom;
            cell.stderr_value = errs[k][stage] / denom;
            cell.accuracy = mean(acc_runs[stage]);
            rep.cells.push_back(std::move(cell));
        }
    }
    return rep;
}

// randomization_test once per noise level
inline std::vector<RandomizationReport> sigma_sweep(const MlpModel& m, const Dataset& ds,
                                                    const std::vector<std::size_t>& features,
                                                    const std::vector<Grid>& grids,
                                                    const std::vector<double>& sigmas,
                                                    const RandomizeConfig& base =
                                                        RandomizeConfig{}) {
    std::vector<RandomizationReport> out;
    out.reserve(sigmas.size());
    for (double sigma : sigmas) {
        RandomizeConfig cfg = base;
        cfg.sigma = sigma;
        out.push_back(randomization_test(m, ds, features, grids, cfg));
    }
    return out;
}

inline void write_randomize_csv(const std::vector<RandomizationReport>& reports,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_randomize_csv: cannot write '" + path + "'");
    out << "kind,stage,layer_name,sigma,mean_norm_distance,stderr,accuracy\n";
    for (const auto& rep : reports)
        for (const auto& cell : rep.cells)
            out << to_string(cell.kind) << ',' << cell.stage << ',' << cell.layer_name << ','
                << format_real(rep.sigma, 17) << ',' << format_real(cell.mean_distance, 17) << ','
                << format_real(cell.stderr_value, 17) << ','
                << (std::isfinite(cell.accuracy) ? format_real(cell.accuracy, 17) : std::string())
                << '\n';
}

}  // namespace effectlab
