#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "effectlab/dataset.hpp"

namespace effectlab {

// Prediction function abstraction: a scalar-output model over p features,
// optionally differentiable, optionally with a known output range.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual double predict(std::span<const double> x) const = 0;

    virtual bool differentiable() const { return false; }

    // partial derivative of the prediction w.r.t. one input feature
    virtual double gradient(std::span<const double> /*x*/, std::size_t /*feature*/) const {
        throw std::runtime_error("gradient: predictor is not differentiable");
    }

    // all partials at once; differentiable models override with one pass
    virtual std::vector<double> input_gradient(std::span<const double> x) const {
        std::vector<double> g(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) g[j] = gradient(x, j);
        return g;
    }

    virtual std::optional<std::pair<double, double>> output_range() const { return std::nullopt; }

    virtual std::optional<std::size_t> input_dim() const { return std::nullopt; }

protected:
    void check_input(std::span<const double> x) const {
        auto dim = input_dim();
        if (dim && x.size() != *dim)
            throw std::invalid_argument("predict: expected " + std::to_string(*dim) +
                                        " features, got " + std::to_string(x.size()));
        for (double v : x)
            if (!std::isfinite(v)) throw std::invalid_argument("predict: non-finite input");
    }
};

struct PredictionBound {
    double lower = 0.0;
    double upper = 0.0;
    enum class Method { analytic, empirical } method = Method::empirical;
};

struct LipschitzEstimate {
    double value = 0.0;
    enum class Method { layer_norm_product, empirical_gradient_max } method =
        Method::layer_norm_product;
};

// ============================== Probe points =================================
//
// Sup-norms over the domain are estimated on a finite probe set: the data
// rows themselves, plus every row with one feature at a time replaced by each
// of `subs` equidistant values across that feature's domain. Enumeration
// order: rows first, then feature-major / substitution-value-major sweeps.

template <typename F>
void for_each_probe(const Dataset& ds, F&& fn, std::size_t subs = 5) {
    std::vector<double> x(ds.p());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        auto r = ds.row(i);
        std::copy(r.begin(), r.end(), x.begin());
        fn(std::span<const double>(x));
    }
    for (std::size_t j = 0; j < ds.p(); ++j) {
        auto [lo, hi] = ds.domain(j);
        for (std::size_t k = 0; k < subs; ++k) {
            double z = (subs == 1) ? lo
                                   : lo + (hi - lo) * static_cast<double>(k) /
                                              static_cast<double>(subs - 1);
            for (std::size_t i = 0; i < ds.n(); ++i) {
                auto r = ds.row(i);
                std::copy(r.begin(), r.end(), x.begin());
                x[j] = z;
                fn(std::span<const double>(x));
            }
        }
    }
}

// Output range: the analytic (0, 1) when the model declares one, else the
// empirical min/max over probe points widened by 5% of the spread.
inline PredictionBound estimate_prediction_bounds(const Predictor& m, const Dataset& ds) {
    if (auto range = m.output_range())
        return {range->first, range->second, PredictionBound::Method::analytic};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for_each_probe(ds, [&](std::span<const double> x) {
        double v = m.predict(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    });
    double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad, PredictionBound::Method::empirical};
}

// max |f - f'| over the probe set (empirical lower estimate of the sup norm)
inline double sup_norm_difference(const Predictor& m, const Predictor& m2, const Dataset& ds,
                                  std::size_t subs = 5) {
    double worst = 0.0;
    for_each_probe(
        ds, [&](std::span<const double> x) { worst = std::max(worst, std::abs(m.predict(x) - m2.predict(x))); },
        subs);
    return worst;
}

// max |df/dx_s - df'/dx_s| over the probe set
inline double sup_norm_gradient_difference(const Predictor& m, const Predictor& m2,
                                           const Dataset& ds, std::size_t feature,
                                           std::size_t subs = 5) {
    if (!m.differentiable() || !m2.differentiable())
        throw std::runtime_error("sup_norm_gradient_difference: both models must be differentiable");
    double worst = 0.0;
    for_each_probe(
        ds,
        [&](std::span<const double> x) {
            worst = std::max(worst, std::abs(m.gradient(x, feature) - m2.gradient(x, feature)));
        },
        subs);
    return worst;
}

// max Euclidean gradient norm over the given sample points
inline LipschitzEstimate estimate_lipschitz_empirical(const Predictor& m,
                                                      const std::vector<std::vector<double>>& points) {
    if (!m.differentiable())
        throw std::runtime_error("estimate_lipschitz_empirical: predictor not differentiable");
    double worst = 0.0;
    for (const auto& x : points) {
        auto g = m.input_gradient(x);
        double norm2 = 0.0;
        for (double v : g) norm2 += v * v;
        worst = std::max(worst, std::sqrt(norm2));
    }
    return {worst, LipschitzEstimate::Method::empirical_gradient_max};
}

// Fraction of rows classified correctly; prediction >= threshold counts as
// class 1 (ties go to 1).
inline double accuracy(const Predictor& m, const Dataset& ds, double threshold = 0.5) {
    const auto& y = ds.labels();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        int pred = m.predict(ds.row(i)) >= threshold ? 1 : 0;
        if (pred == y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ds.n());
}

}  // namespace effectlab
