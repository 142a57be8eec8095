#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "effectlab/dataset.hpp"

namespace effectlab {

enum class GridKind { quantile, equidistant };

// m strictly increasing evaluation points for one feature.
struct Grid {
    std::vector<double> points;
    GridKind kind = GridKind::equidistant;

    std::size_t size() const { return points.size(); }
    double front() const { return points.front(); }
    double back() const { return points.back(); }

    bool operator==(const Grid& other) const { return points == other.points; }
};

namespace detail {

// linear interpolation between order statistics (the common "type 7" rule)
inline double empirical_quantile(const std::vector<double>& sorted, double level) {
    const std::size_t n = sorted.size();
    double h = level * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo >= n - 1) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline Grid make_grid(const Dataset& ds, std::size_t feature, std::size_t m, GridKind kind) {
    if (m < 2) throw std::invalid_argument("make_grid: need at least 2 grid points");
    auto col = ds.column(feature);
    {
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (*lo == *hi)
            throw std::invalid_argument("make_grid: feature '" + ds.feature_names()[feature] +
                                        "' is constant");
    }
    Grid g;
    g.kind = kind;
    if (kind == GridKind::equidistant) {
        auto [lo, hi] = ds.domain(feature);
        g.points.resize(m);
        for (std::size_t k = 0; k < m; ++k)
            g.points[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m - 1);
        g.points.front() = lo;  // keep the endpoints exactly on the domain
        g.points.back() = hi;
    } else {
        std::sort(col.begin(), col.end());
        std::vector<double> pts;
        pts.reserve(m);
        for (std::size_t k = 0; k < m; ++k) {
            double q = detail::empirical_quantile(
                col, static_cast<double>(k) / static_cast<double>(m - 1));
            if (pts.empty() || q > pts.back()) pts.push_back(q);
        }
        if (pts.size() < 2)
            throw std::invalid_argument("make_grid: fewer than 2 distinct quantiles");
        g.points = std::move(pts);
    }
    return g;
}

// Rows whose s-columns lie within Euclidean distance epsilon of x_s.
inline std::vector<std::size_t> neighborhood(const Dataset& ds, const FeatureSet& s,
                                             std::span<const double> x_s, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("neighborhood: epsilon must be >= 0");
    if (x_s.size() != s.size())
        throw std::invalid_argument("neighborhood: query size does not match feature set");
    const double eps2 = epsilon * epsilon;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < s.indices.size(); ++k) {
            double d = x_s[k] - ds.at(i, s.indices[k]);
            d2 += d * d;
        }
        if (d2 <= eps2) out.push_back(i);
    }
    return out;
}

inline std::vector<std::size_t> neighborhood(const Dataset& ds, std::size_t feature, double x,
                                             double epsilon) {
    double q[1] = {x};
    return neighborhood(ds, FeatureSet::single(feature), q, epsilon);
}

// Bin k (0-based, covering (z^k, z^{k+1}]) of each row's feature value.
// Values equal to the first grid point fold into bin 0; values outside the
// grid fold into the nearest end bin so no row is dropped.
inline std::vector<std::vector<std::size_t>> bin_indices(const Dataset& ds, std::size_t feature,
                                                         const Grid& grid) {
    const auto& z = grid.points;
    if (z.size() < 2) throw std::invalid_argument("bin_indices: grid needs at least 2 points");
    for (std::size_t k = 1; k < z.size(); ++k)
        if (!(z[k] > z[k - 1]))
            throw std::invalid_argument("bin_indices: grid not strictly increasing");
    std::vector<std::vector<std::size_t>> bins(z.size() - 1);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double v = ds.at(i, feature);
        // first k with v <= z[k], clamped to a valid bin
        auto it = std::lower_bound(z.begin(), z.end(), v);
        std::size_t k = static_cast<std::size_t>(it - z.begin());
        std::size_t bin = (k == 0) ? 0 : k - 1;
        bin = std::min(bin, bins.size() - 1);
        bins[bin].push_back(i);
    }
    return bins;
}

// Default neighborhood width: a 5% fraction of the feature's spread.
inline double default_epsilon(const Dataset& ds, std::size_t feature) {
    return 0.05 * ds.feature_stddev(feature);
}

}  // namespace effectlab
