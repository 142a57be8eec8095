#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "effectlab/common.hpp"
#include "effectlab/predictor.hpp"

namespace effectlab {

enum class Activation { relu, tanh, sigmoid, identity };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    throw std::logic_error("unknown activation");
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::tanh: return std::tanh(z);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::identity: return z;
    }
    throw std::logic_error("unknown activation");
}

// derivative w.r.t. the pre-activation; relu'(0) = 0 (subgradient choice)
inline double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: {
            double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::sigmoid: {
            double s = 1.0 / (1.0 + std::exp(-z));
            return s * (1.0 - s);
        }
        case Activation::identity: return 1.0;
    }
    throw std::logic_error("unknown activation");
}

inline double activation_lipschitz(Activation a) {
    return a == Activation::sigmoid ? 0.25 : 1.0;
}

// Dense layer: out x in weights (row-major), bias, elementwise activation.
struct Layer {
    std::size_t out = 0, in = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    Activation act = Activation::identity;

    double w(std::size_t r, std::size_t c) const { return weights[r * in + c]; }
    double& w(std::size_t r, std::size_t c) { return weights[r * in + c]; }
};

// Fully connected feed-forward network with a single scalar output.
class MlpModel : public Predictor {
public:
    explicit MlpModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
        if (layers_.empty()) throw std::invalid_argument("MlpModel: no layers");
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& L = layers_[l];
            if (L.out == 0 || L.in == 0 || L.weights.size() != L.out * L.in ||
                L.bias.size() != L.out)
                throw std::invalid_argument("MlpModel: malformed layer " + std::to_string(l));
            if (l > 0 && L.in != layers_[l - 1].out)
                throw std::invalid_argument("MlpModel: dimension mismatch between layers " +
                                            std::to_string(l - 1) + " and " + std::to_string(l));
        }
        if (layers_.back().out != 1)
            throw std::invalid_argument("MlpModel: final layer must have a single output");
    }

    std::size_t num_layers() const { return layers_.size(); }
    const Layer& layer(std::size_t l) const { return layers_[l]; }
    const std::vector<Layer>& layers() const { return layers_; }

    double predict(std::span<const double> x) const override {
        check_input(x);
        std::vector<double> cur(x.begin(), x.end());
        std::vector<double> next;
        for (const Layer& L : layers_) {
            next.assign(L.out, 0.0);
            for (std::size_t r = 0; r < L.out; ++r) {
                double z = L.bias[r];
                for (std::size_t c = 0; c < L.in; ++c) z += L.w(r, c) * cur[c];
                next[r] = activate(L.act, z);
            }
            cur.swap(next);
        }
        return cur[0];
    }

    bool differentiable() const override { return true; }

    // reverse accumulation through the stored pre-activations
    std::vector<double> input_gradient(std::span<const double> x) const override {
        check_input(x);
        std::vector<std::vector<double>> pre(layers_.size());
        std::vector<double> cur(x.begin(), x.end());
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const Layer& L = layers_[l];
            pre[l].assign(L.out, 0.0);
            std::vector<double> post(L.out);
            for (std::size_t r = 0; r < L.out; ++r) {
                double z = L.bias[r];
                for (std::size_t c = 0; c < L.in; ++c) z += L.w(r, c) * cur[c];
                pre[l][r] = z;
                post[r] = activate(L.act, z);
            }
            cur.swap(post);
        }
        std::vector<double> delta{1.0};
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const Layer& L = layers_[l];
            for (std::size_t r = 0; r < L.out; ++r)
                delta[r] *= activate_grad(L.act, pre[l][r]);
            std::vector<double> prev(L.in, 0.0);
            for (std::size_t c = 0; c < L.in; ++c)
                for (std::size_t r = 0; r < L.out; ++r) prev[c] += L.w(r, c) * delta[r];
            delta.swap(prev);
        }
        return delta;
    }

    double gradient(std::span<const double> x, std::size_t feature) const override {
        if (feature >= layers_.front().in)
            throw std::invalid_argument("gradient: feature index out of range");
        return input_gradient(x)[feature];
    }

    std::optional<std::pair<double, double>> output_range() const override {
        if (layers_.back().act == Activation::sigmoid) return std::make_pair(0.0, 1.0);
        return std::nullopt;
    }

    std::optional<std::size_t> input_dim() const override { return layers_.front().in; }

private:
    std::vector<Layer> layers_;
};

// ============================== Spectral norm =================================

namespace detail {

// largest singular value by power iteration on W^T W
inline double operator_norm(const Layer& L, double rel_tol = 1e-6, std::size_t max_iter = 10000) {
    double maxabs = 0.0;
    for (double v : L.weights) maxabs = std::max(maxabs, std::abs(v));
    if (maxabs == 0.0) return 0.0;
    std::vector<double> v(L.in, 1.0 / std::sqrt(static_cast<double>(L.in)));
    std::vector<double> u(L.out);
    double sigma = 0.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t r = 0; r < L.out; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < L.in; ++c) acc += L.w(r, c) * v[c];
            u[r] = acc;
        }
        double nu = 0.0;
        for (double e : u) nu += e * e;
        nu = std::sqrt(nu);  // = ||W v||, the current singular value estimate
        if (nu == 0.0) {
            // iterate landed in the null space; restart from a hashed direction
            Rng r(0x5EED5EEDULL + it);
            double nv = 0.0;
            for (auto& e : v) {
                e = r.uniform(-1.0, 1.0);
                nv += e * e;
            }
            for (auto& e : v) e /= std::sqrt(nv);
            continue;
        }
        if (sigma > 0.0 && std::abs(nu - sigma) <= rel_tol * nu) return nu;
        sigma = nu;
        for (std::size_t c = 0; c < L.in; ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < L.out; ++r) acc += L.w(r, c) * u[r];
            v[c] = acc;
        }
        double nv = 0.0;
        for (double e : v) nv += e * e;
        nv = std::sqrt(nv);
        if (nv == 0.0) return nu;
        for (auto& e : v) e /= nv;
    }
    return sigma;
}

}  // namespace detail

// Upper bound on the Lipschitz constant: product over layers of the weight
// operator 2-norm times the activation's own constant.
inline LipschitzEstimate estimate_lipschitz(const MlpModel& m) {
    double prod = 1.0;
    for (const Layer& L : m.layers())
        prod *= detail::operator_norm(L) * activation_lipschitz(L.act);
    return {prod, LipschitzEstimate::Method::layer_norm_product};
}

// =========================== Layer perturbation ===============================

// New model with i.i.d. Gaussian noise added to one layer's weights (and by
// default its biases); all other layers are copied bit-identically.
inline MlpModel perturb_layer(const MlpModel& m, std::size_t layer, double sigma,
                              std::uint64_t seed, bool weights_only = false) {
    if (layer >= m.num_layers())
        throw std::invalid_argument("perturb_layer: layer index out of range");
    if (sigma < 0.0) throw std::invalid_argument("perturb_layer: sigma must be >= 0");
    std::vector<Layer> layers = m.layers();
    if (sigma > 0.0) {
        Rng rng(seed);
        Layer& L = layers[layer];
        for (auto& w : L.weights) w += rng.normal(0.0, sigma);
        if (!weights_only)
            for (auto& b : L.bias) b += rng.normal(0.0, sigma);
    }
    return MlpModel(std::move(layers));
}

// ============================== Serialization =================================
//
// JSON schema: { "layers": [ { "weights": [[...], ...], "bias": [...],
// "activation": "relu"|"tanh"|"sigmoid"|"identity" } ] }.
// Reals carry 17 significant digits so reloading is bit-exact.

inline void save_model(const MlpModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot write '" + path + "'");
    out << "{\n  \"layers\": [\n";
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        const Layer& L = m.layer(l);
        out << "    {\n      \"weights\": [";
        for (std::size_t r = 0; r < L.out; ++r) {
            out << (r ? ", [" : "[");
            for (std::size_t c = 0; c < L.in; ++c)
                out << (c ? ", " : "") << format_real(L.w(r, c), 17);
            out << "]";
        }
        out << "],\n      \"bias\": [";
        for (std::size_t r = 0; r < L.out; ++r)
            out << (r ? ", " : "") << format_real(L.bias[r], 17);
        out << "],\n      \"activation\": \"" << to_string(L.act) << "\"\n    }";
        out << (l + 1 < m.num_layers() ? ",\n" : "\n");
    }
    out << "  ]\n}\n";
}

inline MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw std::runtime_error("load_model: invalid JSON in '" + path + "': " + e.what());
    }
    if (!doc.contains("layers") || !doc["layers"].is_array() || doc["layers"].empty())
        throw std::runtime_error("load_model: missing or empty 'layers' array");
    std::vector<Layer> layers;
    std::size_t idx = 0;
    for (const auto& jl : doc["layers"]) {
        const std::string where = "layers[" + std::to_string(idx) + "]";
        if (!jl.contains("weights") || !jl["weights"].is_array() || jl["weights"].empty())
            throw std::runtime_error("load_model: missing field " + where + ".weights");
        if (!jl.contains("bias") || !jl["bias"].is_array())
            throw std::runtime_error("load_model: missing field " + where + ".bias");
        if (!jl.contains("activation") || !jl["activation"].is_string())
            throw std::runtime_error("load_model: missing field " + where + ".activation");
        Layer L;
        L.out = jl["weights"].size();
        L.in = jl["weights"][0].size();
        for (const auto& row : jl["weights"]) {
            if (row.size() != L.in)
                throw std::runtime_error("load_model: ragged weight rows in " + where);
            for (const auto& v : row) L.weights.push_back(v.get<double>());
        }
        for (const auto& v : jl["bias"]) L.bias.push_back(v.get<double>());
        try {
            L.act = activation_from_string(jl["activation"].get<std::string>());
        } catch (const std::exception& e) {
            throw std::runtime_error("load_model: " + where + ": " + e.what());
        }
        layers.push_back(std::move(L));
        ++idx;
    }
    return MlpModel(std::move(layers));
}

// ============================== Training ======================================

struct TrainResult {
    MlpModel model;
    double accuracy = 0.0;
    double loss = 0.0;
};

namespace detail {

inline MlpModel init_mlp(std::size_t p, const std::vector<std::size_t>& hidden,
                         Activation hidden_act, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> dims{p};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(1);
    std::vector<Layer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer L;
        L.in = dims[l];
        L.out = dims[l + 1];
        L.act = (l + 2 == dims.size()) ? Activation::sigmoid : hidden_act;
        double r = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
        L.weights.resize(L.out * L.in);
        for (auto& w : L.weights) w = rng.uniform(-r, r);
        L.bias.assign(L.out, 0.0);
        layers.push_back(std::move(L));
    }
    return MlpModel(std::move(layers));
}

}  // namespace detail

// Full-batch gradient descent on the logistic loss; sigmoid output head.
// Deterministic under the seed. Zero epochs returns the seeded
// initialization unchanged.
inline TrainResult train_mlp(const Dataset& ds, const std::vector<std::size_t>& hidden,
                             std::size_t epochs, double learning_rate, std::uint64_t seed,
                             Activation hidden_act = Activation::relu) {
    if (!ds.has_labels()) throw std::runtime_error("train_mlp: dataset has no labels");
    const auto& y = ds.labels();
    const std::size_t n = ds.n();

    MlpModel model = detail::init_mlp(ds.p(), hidden, hidden_act, seed);
    std::vector<Layer> layers = model.layers();
    const std::size_t num_layers = layers.size();

    // activations[l] = output of layer l-1 (l=0 holds the input row)
    std::vector<std::vector<double>> act(num_layers + 1), pre(num_layers);
    std::vector<std::vector<double>> grad_w(num_layers), grad_b(num_layers);

    double last_loss = 0.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t l = 0; l < num_layers; ++l) {
            grad_w[l].assign(layers[l].weights.size(), 0.0);
            grad_b[l].assign(layers[l].bias.size(), 0.0);
        }
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = ds.row(i);
            act[0].assign(row.begin(), row.end());
            for (std::size_t l = 0; l < num_layers; ++l) {
                const Layer& L = layers[l];
                pre[l].assign(L.out, 0.0);
                act[l + 1].assign(L.out, 0.0);
                for (std::size_t r = 0; r < L.out; ++r) {
                    double z = L.bias[r];
                    for (std::size_t c = 0; c < L.in; ++c) z += L.w(r, c) * act[l][c];
                    pre[l][r] = z;
                    act[l + 1][r] = activate(L.act, z);
                }
            }
            double prob = std::clamp(act[num_layers][0], 1e-12, 1.0 - 1e-12);
            loss += y[i] ? -std::log(prob) : -std::log(1.0 - prob);

            // output head is sigmoid + logistic loss: delta collapses to p - y
            std::vector<double> delta{act[num_layers][0] - static_cast<double>(y[i])};
            for (std::size_t l = num_layers; l-- > 0;) {
                const Layer& L = layers[l];
                if (l + 1 < num_layers)
                    for (std::size_t r = 0; r < L.out; ++r)
                        delta[r] *= activate_grad(L.act, pre[l][r]);
                for (std::size_t r = 0; r < L.out; ++r) {
                    grad_b[l][r] += delta[r];
                    for (std::size_t c = 0; c < L.in; ++c)
                        grad_w[l][r * L.in + c] += delta[r] * act[l][c];
                }
                if (l == 0) break;
                std::vector<double> prev(L.in, 0.0);
                for (std::size_t c = 0; c < L.in; ++c)
                    for (std::size_t r = 0; r < L.out; ++r) prev[c] += L.w(r, c) * delta[r];
                delta.swap(prev);
            }
        }
        last_loss = loss / static_cast<double>(n);
        const double scale = learning_rate / static_cast<double>(n);
        for (std::size_t l = 0; l < num_layers; ++l) {
            for (std::size_t k = 0; k < layers[l].weights.size(); ++k)
                layers[l].weights[k] -= scale * grad_w[l][k];
            for (std::size_t k = 0; k < layers[l].bias.size(); ++k)
                layers[l].bias[k] -= scale * grad_b[l][k];
        }
    }

    MlpModel trained(std::move(layers));
    double acc = accuracy(trained, ds);
    return {std::move(trained), acc, last_loss};
}

}  // namespace effectlab
