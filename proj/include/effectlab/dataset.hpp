#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "effectlab/common.hpp"

namespace effectlab {

// Nonempty ordered set of feature column indices.
struct FeatureSet {
    std::vector<std::size_t> indices;

    explicit FeatureSet(std::vector<std::size_t> idx) : indices(std::move(idx)) {
        if (indices.empty()) throw std::invalid_argument("FeatureSet: empty index set");
        std::set<std::size_t> uniq(indices.begin(), indices.end());
        if (uniq.size() != indices.size())
            throw std::invalid_argument("FeatureSet: duplicate indices");
    }

    static FeatureSet single(std::size_t j) { return FeatureSet({j}); }

    std::size_t size() const { return indices.size(); }
    bool contains(std::size_t j) const {
        for (std::size_t k : indices)
            if (k == j) return true;
        return false;
    }
};

// Column indices not in s, ascending.
inline std::vector<std::size_t> complement(std::size_t p, const FeatureSet& s) {
    std::vector<std::size_t> rest;
    rest.reserve(p - s.size());
    for (std::size_t j = 0; j < p; ++j)
        if (!s.contains(j)) rest.push_back(j);
    return rest;
}

// Immutable n x p numeric matrix with named columns, per-column domains and
// optional binary labels. All entries are finite; domains contain the data.
class Dataset {
public:
    Dataset(std::vector<double> values, std::vector<std::string> feature_names,
            std::vector<std::pair<double, double>> domains = {},
            std::optional<std::vector<int>> labels = std::nullopt)
        : values_(std::move(values)),
          names_(std::move(feature_names)),
          domains_(std::move(domains)),
          labels_(std::move(labels)) {
        p_ = names_.size();
        if (p_ == 0) throw std::invalid_argument("Dataset: no features");
        if (values_.empty() || values_.size() % p_ != 0)
            throw std::invalid_argument("Dataset: value count not a multiple of feature count");
        n_ = values_.size() / p_;
        validate();
    }

    std::size_t n() const { return n_; }
    std::size_t p() const { return p_; }

    double at(std::size_t i, std::size_t j) const { return values_[i * p_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * p_, p_}; }
    const std::vector<double>& values() const { return values_; }

    std::vector<double> column(std::size_t j) const {
        check_feature(j);
        std::vector<double> col(n_);
        for (std::size_t i = 0; i < n_; ++i) col[i] = at(i, j);
        return col;
    }

    const std::vector<std::string>& feature_names() const { return names_; }
    const std::vector<std::pair<double, double>>& domains() const { return domains_; }
    std::pair<double, double> domain(std::size_t j) const {
        check_feature(j);
        return domains_[j];
    }

    bool has_labels() const { return labels_.has_value(); }
    const std::vector<int>& labels() const {
        if (!labels_) throw std::runtime_error("Dataset: no labels present");
        return *labels_;
    }

    std::size_t feature_index(const std::string& name_or_index) const {
        for (std::size_t j = 0; j < p_; ++j)
            if (names_[j] == name_or_index) return j;
        try {
            std::size_t pos = 0;
            unsigned long v = std::stoul(name_or_index, &pos);
            if (pos == name_or_index.size() && v < p_) return v;
        } catch (...) {
        }
        throw std::invalid_argument("Dataset: unknown feature '" + name_or_index + "'");
    }

    // Same metadata, different matrix. Domains are kept, so the new values
    // must still lie inside them.
    Dataset with_values(std::vector<double> new_values) const {
        return Dataset(std::move(new_values), names_, domains_, labels_);
    }

    // Euclidean distance over all features (used for the "whole domain" epsilon)
    double diameter() const {
        double acc = 0.0;
        for (std::size_t j = 0; j < p_; ++j) {
            double w = domains_[j].second - domains_[j].first;
            acc += w * w;
        }
        return std::sqrt(acc);
    }

    double feature_stddev(std::size_t j) const {
        auto col = column(j);
        return stddev(col);
    }

private:
    void check_feature(std::size_t j) const {
        if (j >= p_) throw std::invalid_argument("Dataset: feature index out of range");
    }

    void validate() {
        for (std::size_t k = 0; k < values_.size(); ++k)
            if (!std::isfinite(values_[k]))
                throw std::invalid_argument("Dataset: non-finite value at row " +
                                            std::to_string(k / p_) + ", column " +
                                            std::to_string(k % p_));
        std::set<std::string> uniq(names_.begin(), names_.end());
        if (uniq.size() != names_.size())
            throw std::invalid_argument("Dataset: duplicate feature names");
        if (domains_.empty()) {
            domains_.resize(p_);
            for (std::size_t j = 0; j < p_; ++j) {
                double lo = at(0, j), hi = at(0, j);
                for (std::size_t i = 1; i < n_; ++i) {
                    lo = std::min(lo, at(i, j));
                    hi = std::max(hi, at(i, j));
                }
                domains_[j] = {lo, hi};
            }
        } else if (domains_.size() != p_) {
            throw std::invalid_argument("Dataset: domain count does not match feature count");
        } else {
            for (std::size_t j = 0; j < p_; ++j) {
                for (std::size_t i = 0; i < n_; ++i) {
                    double v = at(i, j);
                    if (v < domains_[j].first || v > domains_[j].second)
                        throw std::invalid_argument("Dataset: value outside domain in column '" +
                                                    names_[j] + "' at row " + std::to_string(i));
                }
                if (domains_[j].first > domains_[j].second)
                    throw std::invalid_argument("Dataset: inverted domain for column '" +
                                                names_[j] + "'");
            }
        }
        if (labels_) {
            if (labels_->size() != n_)
                throw std::invalid_argument("Dataset: label count does not match row count");
            for (int y : *labels_)
                if (y != 0 && y != 1)
                    throw std::invalid_argument("Dataset: labels must be binary (0/1)");
        }
    }

    std::vector<double> values_;  // row-major n x p
    std::vector<std::string> names_;
    std::vector<std::pair<double, double>> domains_;
    std::optional<std::vector<int>> labels_;
    std::size_t n_ = 0, p_ = 0;
};

// ============================== CSV I/O ======================================

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// Comma-separated, header row, '.' decimal point. If label_column is given,
// that column is removed from the features and parsed as binary labels.
inline Dataset load_csv(const std::string& path,
                        const std::optional<std::string>& label_column = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file '" + path + "'");
    auto header = detail::split_csv_line(line);
    for (auto& h : header) h = detail::trim(h);
    {
        std::set<std::string> uniq(header.begin(), header.end());
        if (uniq.size() != header.size())
            throw std::runtime_error("load_csv: duplicate header names in '" + path + "'");
    }

    std::size_t label_idx = header.size();
    if (label_column) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == *label_column) label_idx = j;
        if (label_idx == header.size())
            throw std::runtime_error("load_csv: label column '" + *label_column + "' not found");
    }

    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != label_idx) names.push_back(header[j]);
    if (names.empty()) throw std::runtime_error("load_csv: no feature columns");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string cell = detail::trim(cells[j]);
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (...) {
                pos = 0;
            }
            if (pos != cell.size() || !std::isfinite(v))
                throw std::runtime_error("load_csv: non-numeric cell '" + cell + "' at row " +
                                         std::to_string(row) + ", column '" + header[j] + "'");
            if (j == label_idx) {
                if (v != 0.0 && v != 1.0)
                    throw std::runtime_error("load_csv: non-binary label at row " +
                                             std::to_string(row));
                labels.push_back(static_cast<int>(v));
            } else {
                values.push_back(v);
            }
        }
        ++row;
    }
    if (row == 0) throw std::runtime_error("load_csv: no data rows in '" + path + "'");

    std::optional<std::vector<int>> opt_labels;
    if (label_column) opt_labels = std::move(labels);
    return Dataset(std::move(values), std::move(names), {}, std::move(opt_labels));
}

inline void save_csv(const Dataset& ds, const std::string& path,
                     const std::string& label_name = "label") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot write '" + path + "'");
    for (std::size_t j = 0; j < ds.p(); ++j) {
        if (j) out << ',';
        out << ds.feature_names()[j];
    }
    if (ds.has_labels()) out << ',' << label_name;
    out << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.p(); ++j) {
            if (j) out << ',';
            out << format_real(ds.at(i, j), 17);
        }
        if (ds.has_labels()) out << ',' << ds.labels()[i];
        out << '\n';
    }
}

}  // namespace effectlab
