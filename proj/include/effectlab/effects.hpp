#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "effectlab/common.hpp"
#include "effectlab/dataset.hpp"
#include "effectlab/grid.hpp"
#include "effectlab/predictor.hpp"

namespace effectlab {

enum class EffectKind { pd, cd, ale, dale };

inline std::string to_string(EffectKind k) {
    switch (k) {
        case EffectKind::pd: return "pd";
        case EffectKind::cd: return "cd";
        case EffectKind::ale: return "ale";
        case EffectKind::dale: return "dale";
    }
    throw std::logic_error("unknown effect kind");
}

inline EffectKind effect_kind_from_string(const std::string& s) {
    if (s == "pd") return EffectKind::pd;
    if (s == "cd") return EffectKind::cd;
    if (s == "ale") return EffectKind::ale;
    if (s == "dale") return EffectKind::dale;
    throw std::invalid_argument("unknown effect kind '" + s + "'");
}

// Estimation diagnostics: per-point neighborhood sizes or per-bin counts,
// and which points/bins had no data behind them.
struct CurveMeta {
    std::vector<std::size_t> counts;
    std::vector<bool> flagged;
    double epsilon = std::numeric_limits<double>::quiet_NaN();
};

// Grid plus the estimated effect value at every grid point.
struct ExplanationCurve {
    FeatureSet s;
    Grid grid;
    std::vector<double> values;
    EffectKind kind = EffectKind::pd;
    bool centered = false;
    CurveMeta meta;

    std::size_t size() const { return values.size(); }
};

namespace detail {

inline std::size_t single_feature(const FeatureSet& s) {
    if (s.size() != 1)
        throw std::invalid_argument("effect estimators accept a single feature of interest");
    return s.indices[0];
}

inline void check_grid_in_domain(const Dataset& ds, std::size_t feature, const Grid& grid) {
    auto [lo, hi] = ds.domain(feature);
    for (double z : grid.points)
        if (z < lo || z > hi)
            throw std::invalid_argument("grid point " + format_real(z) +
                                        " outside the domain of feature '" +
                                        ds.feature_names()[feature] + "'");
}

}  // namespace detail

// Mean prediction with the feature of interest pinned to each grid value and
// the remaining columns following their empirical marginal.
inline ExplanationCurve pd(const Predictor& m, const Dataset& ds, const FeatureSet& s,
                           const Grid& grid) {
    const std::size_t j = detail::single_feature(s);
    detail::check_grid_in_domain(ds, j, grid);
    ExplanationCurve c{s, grid, std::vector<double>(grid.size(), 0.0), EffectKind::pd, false, {}};
    c.meta.counts.assign(grid.size(), ds.n());
    c.meta.flagged.assign(grid.size(), false);
    std::vector<double> x(ds.p());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            auto r = ds.row(i);
            std::copy(r.begin(), r.end(), x.begin());
            x[j] = grid.points[k];
            acc += m.predict(x);
        }
        c.values[k] = acc / static_cast<double>(ds.n());
    }
    return c;
}

// Like pd, but averaging only rows whose own feature value lies within
// epsilon of the grid value. Points with an empty neighborhood are linearly
// interpolated from the nearest estimable neighbors and flagged.
inline ExplanationCurve cd(const Predictor& m, const Dataset& ds, const FeatureSet& s,
                           const Grid& grid, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("cd: epsilon must be >= 0");
    const std::size_t j = detail::single_feature(s);
    detail::check_grid_in_domain(ds, j, grid);
    ExplanationCurve c{s, grid, std::vector<double>(grid.size(), 0.0), EffectKind::cd, false, {}};
    c.meta.counts.assign(grid.size(), 0);
    c.meta.flagged.assign(grid.size(), false);
    c.meta.epsilon = epsilon;
    std::vector<double> x(ds.p());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto nbrs = neighborhood(ds, j, grid.points[k], epsilon);
        c.meta.counts[k] = nbrs.size();
        if (nbrs.empty()) {
            c.meta.flagged[k] = true;
            continue;
        }
        double acc = 0.0;
        for (std::size_t i : nbrs) {
            auto r = ds.row(i);
            std::copy(r.begin(), r.end(), x.begin());
            x[j] = grid.points[k];
            acc += m.predict(x);
        }
        c.values[k] = acc / static_cast<double>(nbrs.size());
    }
    // fill skipped points from estimable neighbors
    std::vector<std::size_t> good;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (!c.meta.flagged[k]) good.push_back(k);
    if (good.empty()) throw std::runtime_error("cd: neighborhood empty at every grid point");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!c.meta.flagged[k]) continue;
        auto right = std::lower_bound(good.begin(), good.end(), k);
        if (right == good.begin()) {
            c.values[k] = c.values[good.front()];
        } else if (right == good.end()) {
            c.values[k] = c.values[good.back()];
        } else {
            std::size_t hi = *right, lo = *(right - 1);
            double t = (grid.points[k] - grid.points[lo]) / (grid.points[hi] - grid.points[lo]);
            c.values[k] = c.values[lo] + t * (c.values[hi] - c.values[lo]);
        }
    }
    return c;
}

// Accumulated bin-wise mean prediction differences; uncentered, anchored at 0
// on the first grid point. Empty bins contribute nothing and are flagged.
inline ExplanationCurve ale(const Predictor& m, const Dataset& ds, std::size_t feature,
                            const Grid& grid) {
    detail::check_grid_in_domain(ds, feature, grid);
    auto bins = bin_indices(ds, feature, grid);
    ExplanationCurve c{FeatureSet::single(feature), grid,
                       std::vector<double>(grid.size(), 0.0), EffectKind::ale, false, {}};
    c.meta.counts.assign(bins.size(), 0);
    c.meta.flagged.assign(bins.size(), false);
    bool any = false;
    std::vector<double> hi_x(ds.p()), lo_x(ds.p());
    for (std::size_t k = 0; k < bins.size(); ++k) {
        c.meta.counts[k] = bins[k].size();
        double increment = 0.0;
        if (bins[k].empty()) {
            c.meta.flagged[k] = true;
        } else {
            any = true;
            double acc = 0.0;
            for (std::size_t i : bins[k]) {
                auto r = ds.row(i);
                std::copy(r.begin(), r.end(), hi_x.begin());
                std::copy(r.begin(), r.end(), lo_x.begin());
                hi_x[feature] = grid.points[k + 1];
                lo_x[feature] = grid.points[k];
                acc += m.predict(hi_x) - m.predict(lo_x);
            }
            increment = acc / static_cast<double>(bins[k].size());
        }
        c.values[k + 1] = c.values[k] + increment;
    }
    if (!any) throw std::runtime_error("ale: every bin is empty");
    return c;
}

// Gradient-based variant: each bin's effect is the bin width times the mean
// partial derivative at the actual data points inside it.
inline ExplanationCurve dale(const Predictor& m, const Dataset& ds, std::size_t feature,
                             const Grid& grid) {
    if (!m.differentiable()) throw std::runtime_error("dale: predictor is not differentiable");
    detail::check_grid_in_domain(ds, feature, grid);
    auto bins = bin_indices(ds, feature, grid);
    ExplanationCurve c{FeatureSet::single(feature), grid,
                       std::vector<double>(grid.size(), 0.0), EffectKind::dale, false, {}};
    c.meta.counts.assign(bins.size(), 0);
    c.meta.flagged.assign(bins.size(), false);
    bool any = false;
    for (std::size_t k = 0; k < bins.size(); ++k) {
        c.meta.counts[k] = bins[k].size();
        double increment = 0.0;
        if (bins[k].empty()) {
            c.meta.flagged[k] = true;
        } else {
            any = true;
            double acc = 0.0;
            for (std::size_t i : bins[k]) acc += m.gradient(ds.row(i), feature);
            increment = (grid.points[k + 1] - grid.points[k]) * acc /
                        static_cast<double>(bins[k].size());
        }
        c.values[k + 1] = c.values[k] + increment;
    }
    if (!any) throw std::runtime_error("dale: every bin is empty");
    return c;
}

// Shift an uncentered accumulation curve by the mean model prediction.
inline ExplanationCurve center(const ExplanationCurve& c, const Predictor& m, const Dataset& ds) {
    if (c.kind != EffectKind::ale && c.kind != EffectKind::dale)
        throw std::invalid_argument("center: only ale/dale curves are uncentered");
    if (c.centered) throw std::invalid_argument("center: curve is already centered");
    double acc = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) acc += m.predict(ds.row(i));
    double shift = acc / static_cast<double>(ds.n());
    ExplanationCurve out = c;
    for (auto& v : out.values) v += shift;
    out.centered = true;
    return out;
}

// Effect variance: flat curves are unimportant features.
inline double importance(const ExplanationCurve& c) {
    if (c.values.size() < 2)
        throw std::invalid_argument("importance: need at least 2 curve points");
    return variance(c.values);
}

enum class CurveMetric { max_abs, l2_mean };

inline CurveMetric metric_from_string(const std::string& s) {
    if (s == "max-abs") return CurveMetric::max_abs;
    if (s == "l2-mean") return CurveMetric::l2_mean;
    throw std::invalid_argument("unknown metric '" + s + "'");
}

inline double curve_distance(const ExplanationCurve& c, const ExplanationCurve& c2,
                             CurveMetric metric = CurveMetric::max_abs) {
    if (c.kind != c2.kind) throw std::invalid_argument("curve_distance: kinds differ");
    if (!(c.grid == c2.grid)) throw std::invalid_argument("curve_distance: grids differ");
    if (metric == CurveMetric::max_abs) {
        double worst = 0.0;
        for (std::size_t k = 0; k < c.values.size(); ++k)
            worst = std::max(worst, std::abs(c.values[k] - c2.values[k]));
        return worst;
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        double d = c.values[k] - c2.values[k];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(c.values.size()));
}

// ============================== Export ========================================

inline void write_curve_csv(const ExplanationCurve& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_curve_csv: cannot write '" + path + "'");
    out << "grid,value,skipped\n";
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        bool skipped = k < c.meta.flagged.size() && c.meta.flagged[k];
        out << format_real(c.grid.points[k], 17) << ',' << format_real(c.values[k], 17) << ','
            << (skipped ? 1 : 0) << '\n';
    }
}

inline nlohmann::json curve_to_json(const ExplanationCurve& c) {
    nlohmann::json j;
    j["kind"] = to_string(c.kind);
    j["feature"] = c.s.indices[0];
    j["centered"] = c.centered;
    j["grid"] = c.grid.points;
    j["grid_kind"] = c.grid.kind == GridKind::quantile ? "quantile" : "equidistant";
    j["values"] = c.values;
    j["meta"]["counts"] = c.meta.counts;
    j["meta"]["flagged"] = c.meta.flagged;
    if (std::isfinite(c.meta.epsilon)) j["meta"]["epsilon"] = c.meta.epsilon;
    return j;
}

inline void write_curve_json(const ExplanationCurve& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_curve_json: cannot write '" + path + "'");
    out << curve_to_json(c).dump(2) << '\n';
}

}  // namespace effectlab
