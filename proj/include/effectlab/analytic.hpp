#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "effectlab/common.hpp"
#include "effectlab/dataset.hpp"
#include "effectlab/effects.hpp"
#include "effectlab/predictor.hpp"

namespace effectlab {

// f(x) = 1 when the first two features agree in sign, else 0. Piecewise
// constant, so not differentiable.
class XorModel : public Predictor {
public:
    double predict(std::span<const double> x) const override {
        if (x.size() < 2) throw std::invalid_argument("XorModel: needs at least 2 features");
        return x[0] * x[1] > 0.0 ? 1.0 : 0.0;
    }
    std::optional<std::pair<double, double>> output_range() const override {
        return std::make_pair(0.0, 1.0);
    }
};

// w . x + b, optionally squashed through a sigmoid.
class LinearModel : public Predictor {
public:
    LinearModel(std::vector<double> w, double b, bool sigmoid_output = false)
        : w_(std::move(w)), b_(b), sigmoid_(sigmoid_output) {
        if (w_.empty()) throw std::invalid_argument("LinearModel: empty weight vector");
    }

    double predict(std::span<const double> x) const override {
        check_input(x);
        double z = b_;
        for (std::size_t j = 0; j < w_.size(); ++j) z += w_[j] * x[j];
        return sigmoid_ ? 1.0 / (1.0 + std::exp(-z)) : z;
    }

    bool differentiable() const override { return true; }

    double gradient(std::span<const double> x, std::size_t feature) const override {
        check_input(x);
        if (feature >= w_.size()) throw std::invalid_argument("gradient: feature out of range");
        if (!sigmoid_) return w_[feature];
        double s = predict(x);
        return s * (1.0 - s) * w_[feature];
    }

    std::optional<std::pair<double, double>> output_range() const override {
        if (sigmoid_) return std::make_pair(0.0, 1.0);
        return std::nullopt;
    }

    std::optional<std::size_t> input_dim() const override { return w_.size(); }

    const std::vector<double>& weights() const { return w_; }
    double intercept() const { return b_; }

private:
    std::vector<double> w_;
    double b_;
    bool sigmoid_;
};

// ======================= Closed-form effect values ============================

// Mean of the sign-agreement indicator at x1 when the second feature follows
// U[a, b] with a <= 0 <= b. The mass below zero is -a/(b-a): writing it
// a/(b-a) would make it negative for a < 0, so the sign is corrected here.
inline double xor_pd_uniform(double a, double b, double x1) {
    if (!(a <= 0.0 && 0.0 <= b)) throw std::invalid_argument("xor_pd_uniform: need a <= 0 <= b");
    if (a == b) throw std::invalid_argument("xor_pd_uniform: degenerate interval a = b");
    return x1 > 0.0 ? b / (b - a) : -a / (b - a);
}

// Same value when the second feature follows N(mu, sigma).
inline double xor_pd_normal(double mu, double sigma, double x1) {
    if (sigma <= 0.0) throw std::invalid_argument("xor_pd_normal: sigma must be > 0");
    return x1 > 0.0 ? normal_cdf(mu / sigma) : normal_cdf(-mu / sigma);
}

// Exact pd curve of a (non-sigmoid) linear model: w_s z + b + sum of the other
// columns' means weighted by w.
inline ExplanationCurve linear_pd(const std::vector<double>& w, double b, const Dataset& ds,
                                  const FeatureSet& s, const Grid& grid) {
    if (s.size() != 1) throw std::invalid_argument("linear_pd: single feature of interest only");
    if (w.size() != ds.p()) throw std::invalid_argument("linear_pd: weight count mismatch");
    const std::size_t j = s.indices[0];
    double offset = b;
    for (std::size_t k = 0; k < ds.p(); ++k) {
        if (k == j) continue;
        auto col = ds.column(k);
        offset += w[k] * mean(col);
    }
    ExplanationCurve c{s, grid, std::vector<double>(grid.size()), EffectKind::pd, false, {}};
    for (std::size_t k = 0; k < grid.size(); ++k) c.values[k] = w[j] * grid.points[k] + offset;
    return c;
}

// Exact uncentered ale curve of a linear model: w_s (z - x_min).
inline ExplanationCurve linear_ale_uncentered(const std::vector<double>& w, std::size_t feature,
                                              double x_min, const Grid& grid) {
    if (feature >= w.size()) throw std::invalid_argument("linear_ale_uncentered: feature out of range");
    ExplanationCurve c{FeatureSet::single(feature), grid, std::vector<double>(grid.size()),
                       EffectKind::ale, false, {}};
    for (std::size_t k = 0; k < grid.size(); ++k)
        c.values[k] = w[feature] * (grid.points[k] - x_min);
    return c;
}

// ========================= Synthetic data =====================================

enum class LabelRule { linear, xor_sign };

inline LabelRule label_rule_from_string(const std::string& s) {
    if (s == "linear") return LabelRule::linear;
    if (s == "xor") return LabelRule::xor_sign;
    throw std::invalid_argument("unknown label rule '" + s + "'");
}

namespace detail {

// lower Cholesky factor of the equicorrelation matrix (1-rho) I + rho J
inline std::vector<double> equicorrelation_cholesky(std::size_t p, double rho) {
    std::vector<double> a(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) a[i * p + j] = i == j ? 1.0 : rho;
    std::vector<double> l(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) acc -= l[i * p + k] * l[j * p + k];
            if (i == j) {
                if (acc <= 0.0)
                    throw std::invalid_argument(
                        "gen_synthetic: correlation matrix is not positive definite");
                l[i * p + i] = std::sqrt(acc);
            } else {
                l[i * p + j] = acc / l[j * p + j];
            }
        }
    }
    return l;
}

}  // namespace detail

// Gaussian features with a common pairwise correlation, plus binary labels
// from a simple rule: linear thresholds the feature sum at zero, xor tests
// sign agreement of the first two features.
inline Dataset gen_synthetic(std::size_t n, std::size_t p, double correlation, LabelRule rule,
                             std::uint64_t seed) {
    if (n < 2 || p < 2) throw std::invalid_argument("gen_synthetic: need n >= 2 and p >= 2");
    if (correlation < -1.0 || correlation > 1.0)
        throw std::invalid_argument("gen_synthetic: correlation must be in [-1, 1]");
    auto chol = detail::equicorrelation_cholesky(p, correlation);
    Rng rng(seed);
    std::vector<double> values(n * p);
    std::vector<int> labels(n);
    std::vector<double> z(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) z[j] = rng.normal();
        double sum = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k <= j; ++k) v += chol[j * p + k] * z[k];
            values[i * p + j] = v;
            sum += v;
        }
        switch (rule) {
            case LabelRule::linear: labels[i] = sum > 0.0 ? 1 : 0; break;
            case LabelRule::xor_sign:
                labels[i] = values[i * p] * values[i * p + 1] > 0.0 ? 1 : 0;
                break;
        }
    }
    std::vector<std::string> names(p);
    for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j);
    return Dataset(std::move(values), std::move(names), {}, std::move(labels));
}

}  // namespace effectlab
