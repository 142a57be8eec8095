#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "effectlab/bounds.hpp"
#include "effectlab/common.hpp"
#include "effectlab/dataset.hpp"
#include "effectlab/effects.hpp"
#include "effectlab/grid.hpp"
#include "effectlab/predictor.hpp"
#include "effectlab/tv.hpp"

namespace effectlab {

// noise levels for the one-shot Gaussian baseline
inline const std::vector<double> kRandomBaselineSigmas = {0.01, 0.05, 0.10, 0.12, 0.25};
// noise levels the genetic mutation operator draws from
inline const std::vector<double> kMutationSigmas = {0.01, 0.05, 0.10, 0.25, 0.33};

// One-shot Gaussian noise on the listed feature columns, clipped to each
// feature's domain. Deterministic under the seed.
inline Dataset random_perturb(const Dataset& ds, const std::vector<std::size_t>& features,
                              double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw std::invalid_argument("random_perturb: sigma must be >= 0");
    for (std::size_t j : features)
        if (j >= ds.p()) throw std::invalid_argument("random_perturb: feature index out of range");
    std::vector<double> values = ds.values();
    Rng rng(seed);
    for (std::size_t j : features) {
        auto [lo, hi] = ds.domain(j);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            double v = values[i * ds.p() + j] + rng.normal(0.0, sigma);
            values[i * ds.p() + j] = std::clamp(v, lo, hi);
        }
    }
    return ds.with_values(std::move(values));
}

// The two most effect-variant features other than the one being explained;
// ties break toward the lower index.
inline std::array<std::size_t, 2> select_perturbable(const Predictor& m, const Dataset& ds,
                                                     const FeatureSet& s,
                                                     const std::vector<Grid>& grids) {
    if (ds.p() < 3) throw std::invalid_argument("select_perturbable: need at least 3 features");
    if (grids.size() != ds.p())
        throw std::invalid_argument("select_perturbable: need one grid per feature");
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t j = 0; j < ds.p(); ++j) {
        auto curve = pd(m, ds, FeatureSet::single(j), grids[j]);
        ranked.emplace_back(importance(curve), j);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::array<std::size_t, 2> out{};
    std::size_t found = 0;
    for (const auto& [imp, j] : ranked) {
        if (s.contains(j)) continue;
        out[found++] = j;
        if (found == 2) break;
    }
    if (found < 2) throw std::invalid_argument("select_perturbable: fewer than 2 candidates");
    return out;
}

struct AttackConfig {
    FeatureSet s;
    double x_s = 0.0;
    std::optional<double> target;  // nullopt: whichever of {0,1} is farther away
    std::size_t population_size = 100;
    std::size_t iterations = 200;
    std::vector<double> mutation_sigmas = kMutationSigmas;
    std::optional<std::vector<std::size_t>> perturbable;  // nullopt: auto top-2
    std::uint64_t seed = 0;
    EffectKind effect_kind = EffectKind::pd;
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // cd only; NaN = default rule
    double crossover_rate = 0.5;  // per-cell swap probability within a mated pair
    bool elitism = true;

    explicit AttackConfig(FeatureSet s_) : s(std::move(s_)) {}
};

struct AttackResult {
    Dataset perturbed;
    double original_value = 0.0;
    double final_value = 0.0;
    double shift = 0.0;
    std::vector<double> fitness_history;  // best fitness after each iteration
    double tv_empirical = 0.0;
    double tv_histogram = 0.0;
    std::size_t evaluations = 0;
    double target_used = 0.0;
    std::vector<std::size_t> perturbable_used;
};

namespace detail {

// single-point effect value on a raw matrix sharing the original's layout
inline double effect_value_at(const Predictor& m, const std::vector<double>& values,
                              std::size_t n, std::size_t p, std::size_t s_col, double z,
                              const std::vector<std::size_t>* cd_rows) {
    std::vector<double> x(p);
    double acc = 0.0;
    std::size_t count = cd_rows ? cd_rows->size() : n;
    for (std::size_t r = 0; r < count; ++r) {
        std::size_t i = cd_rows ? (*cd_rows)[r] : r;
        std::copy(values.begin() + i * p, values.begin() + (i + 1) * p, x.begin());
        x[s_col] = z;
        acc += m.predict(x);
    }
    return acc / static_cast<double>(count);
}

}  // namespace detail

// Genetic data-poisoning attack: evolves whole candidate datasets (only the
// perturbable columns ever change) to push the explanation value at x_s
// toward the target. Per iteration: Gaussian mutation with out-of-domain
// values resampled from the original column, cell-swap crossover between
// mated pairs, fitness = |explanation - target|, roulette-wheel selection,
// and (by default) unconditional survival of the best individual.
inline AttackResult ga_attack(const Predictor& m, const Dataset& ds, const AttackConfig& cfg) {
    if (cfg.population_size < 2) throw std::invalid_argument("ga_attack: population_size >= 2");
    if (cfg.iterations < 1) throw std::invalid_argument("ga_attack: iterations >= 1");
    if (cfg.s.size() != 1) throw std::invalid_argument("ga_attack: single feature of interest");
    const std::size_t s_col = cfg.s.indices[0];
    const std::size_t n = ds.n(), p = ds.p();

    std::vector<std::size_t> perturbable;
    if (cfg.perturbable) {
        perturbable = *cfg.perturbable;
        if (perturbable.empty()) throw std::invalid_argument("ga_attack: empty perturbable set");
        for (std::size_t j : perturbable) {
            if (j >= p) throw std::invalid_argument("ga_attack: perturbable index out of range");
            if (cfg.s.contains(j))
                throw std::invalid_argument("ga_attack: perturbable must exclude the explained feature");
        }
    } else {
        std::vector<Grid> grids;
        grids.reserve(p);
        for (std::size_t j = 0; j < p; ++j)
            grids.push_back(make_grid(ds, j, std::min<std::size_t>(20, n), GridKind::quantile));
        auto top2 = select_perturbable(m, ds, cfg.s, grids);
        perturbable = {top2[0], top2[1]};
    }

    // cd averages over a fixed neighborhood: column s is never perturbed
    std::optional<std::vector<std::size_t>> cd_rows;
    if (cfg.effect_kind == EffectKind::cd) {
        double eps = std::isfinite(cfg.epsilon) ? cfg.epsilon : default_epsilon(ds, s_col);
        cd_rows = neighborhood(ds, s_col, cfg.x_s, eps);
        if (cd_rows->empty())
            throw std::runtime_error("ga_attack: effect inestimable at x_s (empty neighborhood)");
    } else if (cfg.effect_kind != EffectKind::pd) {
        throw std::invalid_argument("ga_attack: effect kind must be pd or cd");
    }
    const std::vector<std::size_t>* cd_ptr = cd_rows ? &*cd_rows : nullptr;

    const double original_value =
        detail::effect_value_at(m, ds.values(), n, p, s_col, cfg.x_s, cd_ptr);
    const double target = cfg.target ? *cfg.target
                                     : (std::abs(original_value - 0.0) >=
                                                std::abs(original_value - 1.0)
                                            ? 0.0
                                            : 1.0);

    // originals per perturbable column, for resampling out-of-domain mutants
    std::vector<std::vector<double>> original_cols(perturbable.size());
    for (std::size_t c = 0; c < perturbable.size(); ++c)
        original_cols[c] = ds.column(perturbable[c]);

    const std::size_t pop = cfg.population_size;
    std::vector<std::vector<double>> population(pop, ds.values());
    std::vector<double> fitness(pop, 0.0);
    std::size_t evaluations = 0;

    std::vector<double> best_matrix = ds.values();
    double best_fitness = std::abs(original_value - target);
    double best_value = original_value;
    std::vector<double> history;
    history.reserve(cfg.iterations);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const std::uint64_t stage = derive_seed(cfg.seed, it);

        // mutation
        for (std::size_t i = 0; i < pop; ++i) {
            Rng rng(derive_seed(stage, i));
            double sigma = cfg.mutation_sigmas.empty()
                               ? 0.0
                               : cfg.mutation_sigmas[rng.uniform_index(cfg.mutation_sigmas.size())];
            for (std::size_t c = 0; c < perturbable.size(); ++c) {
                std::size_t j = perturbable[c];
                auto [lo, hi] = ds.domain(j);
                for (std::size_t r = 0; r < n; ++r) {
                    double v = population[i][r * p + j] + rng.normal(0.0, sigma);
                    if (v < lo || v > hi) v = original_cols[c][rng.uniform_index(n)];
                    population[i][r * p + j] = v;
                }
            }
        }

        // crossover between consecutive pairs
        for (std::size_t pair = 0; pair + 1 < pop; pair += 2) {
            Rng rng(derive_seed(stage, pop + pair));
            auto& a = population[pair];
            auto& b = population[pair + 1];
            for (std::size_t j : perturbable)
                for (std::size_t r = 0; r < n; ++r)
                    if (rng.uniform01() < cfg.crossover_rate) std::swap(a[r * p + j], b[r * p + j]);
        }

        // fitness
        parallel_for(pop, [&](std::size_t i) {
            double v = detail::effect_value_at(m, population[i], n, p, s_col, cfg.x_s, cd_ptr);
            fitness[i] = std::abs(v - target);
        });
        evaluations += pop;
        for (std::size_t i = 0; i < pop; ++i) {
            if (fitness[i] < best_fitness) {
                best_fitness = fitness[i];
                best_matrix = population[i];
                best_value =
                    detail::effect_value_at(m, population[i], n, p, s_col, cfg.x_s, cd_ptr);
            }
        }
        history.push_back(best_fitness);

        // roulette-wheel selection on weights (worst - fitness + eps)
        if (it + 1 < cfg.iterations) {
            Rng rng(derive_seed(stage, 2 * pop + 1));
            double worst = *std::max_element(fitness.begin(), fitness.end());
            std::vector<double> cumulative(pop);
            double total = 0.0;
            for (std::size_t i = 0; i < pop; ++i) {
                total += worst - fitness[i] + 1e-9;
                cumulative[i] = total;
            }
            std::vector<std::vector<double>> next;
            next.reserve(pop);
            for (std::size_t k = 0; k < pop; ++k) {
                double u = rng.uniform01() * total;
                auto sel = std::lower_bound(cumulative.begin(), cumulative.end(), u);
                std::size_t idx = std::min<std::size_t>(sel - cumulative.begin(), pop - 1);
                next.push_back(population[idx]);
            }
            if (cfg.elitism) next[0] = best_matrix;
            population.swap(next);
        }
    }

    Dataset perturbed = ds.with_values(best_matrix);
    auto rest = complement(p, cfg.s);
    AttackResult res{std::move(perturbed),
                     original_value,
                     best_value,
                     std::abs(original_value - best_value),
                     std::move(history),
                     0.0,
                     0.0,
                     evaluations,
                     target,
                     perturbable};
    res.tv_empirical = empirical_tv_distance(ds, res.perturbed, rest);
    auto edges = make_shared_edges(ds, res.perturbed, rest);
    res.tv_histogram = tv_distance(build_histogram(ds, rest, edges),
                                   build_histogram(res.perturbed, rest, edges));
    return res;
}

// ============================== Sweep =========================================

struct SweepRow {
    std::size_t feature = 0;
    double x_s = 0.0;
    std::string method;  // "random" | "ga"
    double sigma = std::numeric_limits<double>::quiet_NaN();  // NaN for ga
    std::uint64_t seed = 0;
    double shift = 0.0;
    double tv_empirical = 0.0;
    double tv_histogram = 0.0;
    double bound_raw = 0.0;
    double bound_capped = 0.0;
};

struct SweepConfig {
    EffectKind kind = EffectKind::pd;
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> random_sigmas = kRandomBaselineSigmas;
    std::optional<std::vector<std::size_t>> perturbable;
    std::size_t population_size = 100;
    std::size_t iterations = 200;
    std::vector<double> mutation_sigmas = kMutationSigmas;
};

// One row per (grid point, method, sigma, seed): the observed explanation
// shift, both TV measurements and the matching capped bound.
inline std::vector<SweepRow> sweep(const Predictor& m, const Dataset& ds, const FeatureSet& s,
                                   const std::vector<double>& grid_points,
                                   const std::vector<std::string>& methods,
                                   const std::vector<std::uint64_t>& seeds,
                                   const SweepConfig& cfg = SweepConfig{}) {
    if (s.size() != 1) throw std::invalid_argument("sweep: single feature of interest");
    const std::size_t s_col = s.indices[0];
    const std::size_t n = ds.n(), p = ds.p();
    const auto rest = complement(p, s);
    const PredictionBound pb = estimate_prediction_bounds(m, ds);
    const double bmag = std::max(std::abs(pb.lower), std::abs(pb.upper));
    const double eps = std::isfinite(cfg.epsilon) ? cfg.epsilon : default_epsilon(ds, s_col);

    std::vector<std::size_t> perturbable;
    if (cfg.perturbable) {
        perturbable = *cfg.perturbable;
        for (std::size_t j : perturbable)
            if (s.contains(j))
                std::cerr << "warning: sweep perturbs the explained feature (column "
                          << j << ")\n";
    } else {
        std::vector<Grid> grids;
        for (std::size_t j = 0; j < p; ++j)
            grids.push_back(make_grid(ds, j, std::min<std::size_t>(20, n), GridKind::quantile));
        auto top2 = select_perturbable(m, ds, s, grids);
        perturbable = {top2[0], top2[1]};
    }

    auto original_at = [&](double z) {
        const std::vector<std::size_t>* rows = nullptr;
        std::vector<std::size_t> nbrs;
        if (cfg.kind == EffectKind::cd) {
            nbrs = neighborhood(ds, s_col, z, eps);
            rows = &nbrs;
            if (nbrs.empty()) return std::numeric_limits<double>::quiet_NaN();
        }
        return detail::effect_value_at(m, ds.values(), n, p, s_col, z, rows);
    };

    auto measure = [&](const Dataset& perturbed, double z, double gz, SweepRow& row) {
        const std::vector<std::size_t>* rows = nullptr;
        std::vector<std::size_t> nbrs;
        double cond_tv = std::numeric_limits<double>::quiet_NaN();
        auto edges = make_shared_edges(ds, perturbed, rest);
        if (cfg.kind == EffectKind::cd) {
            nbrs = neighborhood(perturbed, s_col, z, eps);
            rows = &nbrs;
            auto ct = detail::try_conditional_tv(ds, perturbed, s, z, eps, edges);
            if (ct) cond_tv = *ct;
        }
        double shifted = (rows && rows->empty())
                             ? std::numeric_limits<double>::quiet_NaN()
                             : detail::effect_value_at(m, perturbed.values(), n, p, s_col, z, rows);
        row.shift = std::abs(gz - shifted);
        row.tv_empirical = empirical_tv_distance(ds, perturbed, rest);
        row.tv_histogram = tv_distance(build_histogram(ds, rest, edges),
                                       build_histogram(perturbed, rest, edges));
        double dtv = cfg.kind == EffectKind::cd ? cond_tv : row.tv_empirical;
        if (std::isfinite(dtv)) {
            row.bound_raw = pd_data_bound(bmag, dtv);
            row.bound_capped = detail::cap_or_raw(gz, pb.lower, pb.upper, row.bound_raw);
        } else {
            row.bound_raw = row.bound_capped = std::numeric_limits<double>::quiet_NaN();
        }
    };

    std::vector<SweepRow> rows;
    for (double z : grid_points) {
        double gz = original_at(z);
        if (!std::isfinite(gz)) continue;  // inestimable point, skipped
        for (const auto& method : methods) {
            for (std::uint64_t seed : seeds) {
                if (method == "random") {
                    for (double sigma : cfg.random_sigmas) {
                        auto perturbed = random_perturb(
                            ds, perturbable, sigma,
                            derive_seed(seed, static_cast<std::uint64_t>(sigma * 1e6)));
                        SweepRow row;
                        row.feature = s_col;
                        row.x_s = z;
                        row.method = "random";
                        row.sigma = sigma;
                        row.seed = seed;
                        measure(perturbed, z, gz, row);
                        rows.push_back(std::move(row));
                    }
                } else if (method == "ga") {
                    AttackConfig ac(s);
                    ac.x_s = z;
                    ac.population_size = cfg.population_size;
                    ac.iterations = cfg.iterations;
                    ac.mutation_sigmas = cfg.mutation_sigmas;
                    ac.perturbable = perturbable;
                    ac.seed = seed;
                    ac.effect_kind = cfg.kind;
                    ac.epsilon = eps;
                    auto result = ga_attack(m, ds, ac);
                    SweepRow row;
                    row.feature = s_col;
                    row.x_s = z;
                    row.method = "ga";
                    row.seed = seed;
                    measure(result.perturbed, z, gz, row);
                    rows.push_back(std::move(row));
                } else {
                    throw std::invalid_argument("sweep: unknown method '" + method + "'");
                }
            }
        }
    }
    return rows;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_sweep_csv: cannot write '" + path + "'");
    out << "feature,x_s,method,sigma,seed,shift,tv_empirical,tv_histogram,bound_raw,bound_capped\n";
    auto cell = [](double v) { return std::isfinite(v) ? format_real(v, 17) : std::string(); };
    for (const auto& r : rows)
        out << r.feature << ',' << format_real(r.x_s, 17) << ',' << r.method << ','
            << cell(r.sigma) << ',' << r.seed << ',' << cell(r.shift) << ','
            << cell(r.tv_empirical) << ',' << cell(r.tv_histogram) << ',' << cell(r.bound_raw)
            << ',' << cell(r.bound_capped) << '\n';
}

}  // namespace effectlab
