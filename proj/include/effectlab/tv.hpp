#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "effectlab/dataset.hpp"
#include "effectlab/grid.hpp"

namespace effectlab {

// Sparse multi-dimensional histogram: per-dimension edges plus a mass per
// occupied cell. Masses sum to 1 over the rows it was built from.
struct Histogram {
    std::vector<std::vector<double>> edges;               // per dimension, size bins+1
    std::map<std::vector<std::int32_t>, double> masses;   // cell index -> mass

    double total_mass() const {
        double acc = 0.0;
        for (const auto& [cell, m] : masses) acc += m;
        return acc;
    }
};

// TV estimation error vs resolution trade-off: ceil(sqrt(n)) bins, capped.
inline std::size_t default_bin_count(std::size_t n) {
    auto b = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    return std::min<std::size_t>(std::max<std::size_t>(b, 1), 32);
}

// Equidistant edges per selected column, spanning both datasets so two
// histograms built from the pair share a common cell structure.
inline std::vector<std::vector<double>> make_shared_edges(const Dataset& ds, const Dataset& ds2,
                                                          const std::vector<std::size_t>& columns,
                                                          std::size_t bins = 0) {
    if (columns.empty()) throw std::invalid_argument("make_shared_edges: empty column set");
    if (bins == 0) bins = default_bin_count(std::max(ds.n(), ds2.n()));
    std::vector<std::vector<double>> edges;
    edges.reserve(columns.size());
    for (std::size_t j : columns) {
        double lo = std::min(ds.domain(j).first, ds2.domain(j).first);
        double hi = std::max(ds.domain(j).second, ds2.domain(j).second);
        if (hi <= lo) hi = lo + 1.0;  // constant column: single degenerate cell
        std::vector<double> e(bins + 1);
        for (std::size_t k = 0; k <= bins; ++k)
            e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
        edges.push_back(std::move(e));
    }
    return edges;
}

namespace detail {

inline std::int32_t cell_of(const std::vector<double>& edges, double v) {
    // half-open [e_k, e_{k+1}) with the last bin closed; out-of-range clamps
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto k = static_cast<std::int64_t>(it - edges.begin()) - 1;
    k = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(edges.size()) - 2);
    return static_cast<std::int32_t>(k);
}

}  // namespace detail

// Histogram of the selected columns over the given rows (all rows if empty
// filter), each row contributing equal mass.
inline Histogram build_histogram(const Dataset& ds, const std::vector<std::size_t>& columns,
                                 const std::vector<std::vector<double>>& edges,
                                 const std::vector<std::size_t>* rows = nullptr) {
    if (columns.size() != edges.size())
        throw std::invalid_argument("build_histogram: edge dimensions do not match columns");
    Histogram h;
    h.edges = edges;
    const std::size_t count = rows ? rows->size() : ds.n();
    if (count == 0) throw std::invalid_argument("build_histogram: no rows");
    const double w = 1.0 / static_cast<double>(count);
    std::vector<std::int32_t> cell(columns.size());
    for (std::size_t r = 0; r < count; ++r) {
        std::size_t i = rows ? (*rows)[r] : r;
        for (std::size_t d = 0; d < columns.size(); ++d)
            cell[d] = detail::cell_of(edges[d], ds.at(i, columns[d]));
        h.masses[cell] += w;
    }
    return h;
}

// Half the l1 distance between two histograms on identical edges.
inline double tv_distance(const Histogram& h, const Histogram& h2) {
    if (h.edges != h2.edges) throw std::invalid_argument("tv_distance: mismatched edges");
    double acc = 0.0;
    auto a = h.masses.begin();
    auto b = h2.masses.begin();
    while (a != h.masses.end() || b != h2.masses.end()) {
        if (b == h2.masses.end() || (a != h.masses.end() && a->first < b->first)) {
            acc += a->second;
            ++a;
        } else if (a == h.masses.end() || b->first < a->first) {
            acc += b->second;
            ++b;
        } else {
            acc += std::abs(a->second - b->second);
            ++a;
            ++b;
        }
    }
    return std::clamp(0.5 * acc, 0.0, 1.0);  // accumulated 1/n masses can overshoot by ulps
}

// TV between the empirical point-mass measures of the selected columns:
// every row is an atom of mass 1/n at its exact value tuple.
inline double empirical_tv_distance(const Dataset& ds, const Dataset& ds2,
                                    const std::vector<std::size_t>& columns) {
    if (columns.empty()) throw std::invalid_argument("empirical_tv_distance: empty column set");
    // two masses per atom so the result is exactly symmetric in the arguments
    std::map<std::vector<double>, std::pair<double, double>> atoms;
    const double wa = 1.0 / static_cast<double>(ds.n());
    const double wb = 1.0 / static_cast<double>(ds2.n());
    std::vector<double> key(columns.size());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t d = 0; d < columns.size(); ++d) key[d] = ds.at(i, columns[d]);
        atoms[key].first += wa;
    }
    for (std::size_t i = 0; i < ds2.n(); ++i) {
        for (std::size_t d = 0; d < columns.size(); ++d) key[d] = ds2.at(i, columns[d]);
        atoms[key].second += wb;
    }
    double acc = 0.0;
    for (const auto& [k, m] : atoms) acc += std::abs(m.first - m.second);
    return std::clamp(0.5 * acc, 0.0, 1.0);
}

namespace detail {

// nullopt when either epsilon-neighborhood is empty (inestimable conditional)
inline std::optional<double> try_conditional_tv(const Dataset& ds, const Dataset& ds2,
                                                const FeatureSet& s, double x_s, double epsilon,
                                                const std::vector<std::vector<double>>& edges) {
    double q[1] = {x_s};
    if (s.size() != 1)
        throw std::invalid_argument("conditional_tv_distance: single feature of interest only");
    auto na = neighborhood(ds, s, q, epsilon);
    auto nb = neighborhood(ds2, s, q, epsilon);
    if (na.empty() || nb.empty()) return std::nullopt;
    auto rest = complement(ds.p(), s);
    auto rest2 = complement(ds2.p(), s);
    Histogram ha = build_histogram(ds, rest, edges, &na);
    Histogram hb = build_histogram(ds2, rest2, edges, &nb);
    return tv_distance(ha, hb);
}

}  // namespace detail

// TV between the conditional distributions of the remaining columns given
// the feature of interest falls in the epsilon-neighborhood of x_s.
inline double conditional_tv_distance(const Dataset& ds, const Dataset& ds2, const FeatureSet& s,
                                      double x_s, double epsilon,
                                      const std::vector<std::vector<double>>& edges) {
    auto tv = detail::try_conditional_tv(ds, ds2, s, x_s, epsilon, edges);
    if (!tv)
        throw std::runtime_error("conditional_tv_distance: empty neighborhood at x_s = " +
                                 format_real(x_s));
    return *tv;
}

// Grid point with the worst-case conditional TV, skipping points where the
// conditional is inestimable; ties break toward the smaller grid value.
inline std::pair<double, double> max_conditional_tv(const Dataset& ds, const Dataset& ds2,
                                                    const FeatureSet& s, const Grid& grid,
                                                    double epsilon,
                                                    const std::vector<std::vector<double>>& edges) {
    if (grid.points.empty()) throw std::invalid_argument("max_conditional_tv: empty grid");
    bool found = false;
    double best_z = 0.0, best_tv = 0.0;
    for (double z : grid.points) {
        auto tv = detail::try_conditional_tv(ds, ds2, s, z, epsilon, edges);
        if (!tv) continue;
        if (!found || *tv > best_tv) {
            found = true;
            best_z = z;
            best_tv = *tv;
        }
    }
    if (!found)
        throw std::runtime_error("max_conditional_tv: conditional inestimable at every grid point");
    return {best_z, best_tv};
}

}  // namespace effectlab
