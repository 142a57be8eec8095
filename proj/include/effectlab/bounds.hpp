#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "effectlab/common.hpp"
#include "effectlab/dataset.hpp"
#include "effectlab/effects.hpp"
#include "effectlab/predictor.hpp"

namespace effectlab {

// ====================== Pointwise bound formulas ==============================

// Worst-case shift of a pd value under a change of the estimation data,
// in terms of the TV distance between the remaining columns' distributions.
inline double pd_data_bound(double B, double dtv) {
    if (B < 0.0) throw std::invalid_argument("pd_data_bound: B must be >= 0");
    if (dtv < 0.0 || dtv > 1.0) throw std::invalid_argument("pd_data_bound: dtv must be in [0,1]");
    return 2.0 * B * dtv;
}

// Same form with the conditional TV at the queried point.
inline double cd_data_bound(double B, double conditional_dtv) {
    return pd_data_bound(B, conditional_dtv);
}

// A bounded-output model can move an effect value at most to the nearer of
// its output limits, which flattens any raw bound past that distance.
inline double cap_bound(double g_value, double A, double B, double raw) {
    if (!(A <= g_value && g_value <= B))
        throw std::invalid_argument("cap_bound: effect value outside [A, B]");
    return std::min(raw, std::max(std::abs(g_value - B), std::abs(g_value - A)));
}

// Tighter per-point constant: largest |prediction| reachable with the feature
// of interest pinned at x_s, over the observed rows, widened by 5%.
inline double pointwise_B(const Predictor& m, const Dataset& ds, const FeatureSet& s, double x_s) {
    if (s.size() != 1) throw std::invalid_argument("pointwise_B: single feature of interest only");
    const std::size_t j = s.indices[0];
    double worst = 0.0;
    std::vector<double> x(ds.p());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        auto r = ds.row(i);
        std::copy(r.begin(), r.end(), x.begin());
        x[j] = x_s;
        worst = std::max(worst, std::abs(m.predict(x)));
    }
    return worst * 1.05;
}

// Accumulation bound under data change: grows linearly from the accumulation
// start with the worst conditional TV over the grid.
inline double ale_data_bound(double L, double x_s, double x_min, double max_dtv) {
    if (L < 0.0) throw std::invalid_argument("ale_data_bound: L must be >= 0");
    if (x_s < x_min) throw std::invalid_argument("ale_data_bound: x_s must be >= x_min");
    if (max_dtv < 0.0 || max_dtv > 1.0)
        throw std::invalid_argument("ale_data_bound: dtv must be in [0,1]");
    return 2.0 * L * (x_s - x_min) * max_dtv;
}

// Model-change bounds: the sup-norm of the model difference itself.
inline double pd_model_bound(double sup_norm) {
    if (sup_norm < 0.0) throw std::invalid_argument("pd_model_bound: negative sup norm");
    return sup_norm;
}

inline double cd_model_bound(double sup_norm_domain) {
    if (sup_norm_domain < 0.0) throw std::invalid_argument("cd_model_bound: negative sup norm");
    return sup_norm_domain;
}

// Accumulation bound under model change, from the sup-norm of the partial
// derivative difference (the tighter form)...
inline double ale_model_bound(double x_s, double x_min, double sup_grad_norm) {
    if (x_s < x_min) throw std::invalid_argument("ale_model_bound: x_s must be >= x_min");
    if (sup_grad_norm < 0.0) throw std::invalid_argument("ale_model_bound: negative sup norm");
    return (x_s - x_min) * sup_grad_norm;
}

// ...and from the two Lipschitz constants (the looser worst case).
inline double ale_model_bound_lipschitz(double x_s, double x_min, double L, double L2) {
    if (x_s < x_min)
        throw std::invalid_argument("ale_model_bound_lipschitz: x_s must be >= x_min");
    if (L < 0.0 || L2 < 0.0)
        throw std::invalid_argument("ale_model_bound_lipschitz: negative Lipschitz constant");
    return (x_s - x_min) * (L + L2);
}

// ============================== Reports =======================================

enum class BoundKind { pd_data, cd_data, ale_data, pd_model, cd_model, ale_model_A, ale_model_B };

inline std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::pd_data: return "pd-data";
        case BoundKind::cd_data: return "cd-data";
        case BoundKind::ale_data: return "ale-data";
        case BoundKind::pd_model: return "pd-model";
        case BoundKind::cd_model: return "cd-model";
        case BoundKind::ale_model_A: return "ale-model-A";
        case BoundKind::ale_model_B: return "ale-model-B";
    }
    throw std::logic_error("unknown bound kind");
}

// Constants behind a report; only the fields that apply are set.
struct BoundConstants {
    std::optional<double> A, B, L, L2;
    std::optional<double> dtv;
    std::optional<double> max_conditional_dtv, z_star;
    std::optional<double> sup_norm, sup_grad_norm;
    std::optional<double> x_min;
    std::string tv_method;  // "empirical" | "histogram" when a TV was measured
};

struct BoundPoint {
    double x = 0.0;
    double raw = 0.0;
    double capped = 0.0;
};

struct BoundReport {
    BoundKind kind = BoundKind::pd_data;
    std::vector<BoundPoint> points;
    BoundConstants constants;
};

namespace detail {

// cap only where the effect value actually sits inside [A, B]
inline double cap_or_raw(double g, double A, double B, double raw) {
    if (A <= g && g <= B) return cap_bound(g, A, B, raw);
    return raw;
}

}  // namespace detail

inline BoundReport make_pd_data_report(const ExplanationCurve& original,
                                       const PredictionBound& pb, double dtv,
                                       const std::string& tv_method) {
    BoundReport rep;
    rep.kind = BoundKind::pd_data;
    rep.constants.A = pb.lower;
    rep.constants.B = pb.upper;
    rep.constants.dtv = dtv;
    rep.constants.tv_method = tv_method;
    const double bmag = std::max(std::abs(pb.lower), std::abs(pb.upper));
    for (std::size_t k = 0; k < original.size(); ++k) {
        double raw = pd_data_bound(bmag, dtv);
        double capped = detail::cap_or_raw(original.values[k], pb.lower, pb.upper, raw);
        rep.points.push_back({original.grid.points[k], raw, capped});
    }
    return rep;
}

// per_point_dtv: conditional TV at each grid point, NaN where inestimable
inline BoundReport make_cd_data_report(const ExplanationCurve& original,
                                       const PredictionBound& pb,
                                       const std::vector<double>& per_point_dtv) {
    if (per_point_dtv.size() != original.size())
        throw std::invalid_argument("make_cd_data_report: dtv count mismatch");
    BoundReport rep;
    rep.kind = BoundKind::cd_data;
    rep.constants.A = pb.lower;
    rep.constants.B = pb.upper;
    rep.constants.tv_method = "histogram";
    const double bmag = std::max(std::abs(pb.lower), std::abs(pb.upper));
    for (std::size_t k = 0; k < original.size(); ++k) {
        double x = original.grid.points[k];
        if (!std::isfinite(per_point_dtv[k])) {
            double nan = std::numeric_limits<double>::quiet_NaN();
            rep.points.push_back({x, nan, nan});
            continue;
        }
        double raw = cd_data_bound(bmag, per_point_dtv[k]);
        double capped = detail::cap_or_raw(original.values[k], pb.lower, pb.upper, raw);
        rep.points.push_back({x, raw, capped});
    }
    return rep;
}

// centered curve supplies the per-point values used for capping
inline BoundReport make_ale_data_report(const ExplanationCurve& centered_original,
                                        const PredictionBound& pb, double L, double max_dtv,
                                        double z_star) {
    BoundReport rep;
    rep.kind = BoundKind::ale_data;
    rep.constants.A = pb.lower;
    rep.constants.B = pb.upper;
    rep.constants.L = L;
    rep.constants.max_conditional_dtv = max_dtv;
    rep.constants.z_star = z_star;
    rep.constants.x_min = centered_original.grid.points.front();
    rep.constants.tv_method = "histogram";
    const double x_min = centered_original.grid.points.front();
    for (std::size_t k = 0; k < centered_original.size(); ++k) {
        double x = centered_original.grid.points[k];
        double raw = ale_data_bound(L, x, x_min, max_dtv);
        double capped = detail::cap_or_raw(centered_original.values[k], pb.lower, pb.upper, raw);
        rep.points.push_back({x, raw, capped});
    }
    return rep;
}

inline BoundReport make_pd_model_report(const ExplanationCurve& original,
                                        const PredictionBound& pb, double sup_norm) {
    BoundReport rep;
    rep.kind = BoundKind::pd_model;
    rep.constants.A = pb.lower;
    rep.constants.B = pb.upper;
    rep.constants.sup_norm = sup_norm;
    for (std::size_t k = 0; k < original.size(); ++k) {
        double raw = pd_model_bound(sup_norm);
        double capped = detail::cap_or_raw(original.values[k], pb.lower, pb.upper, raw);
        rep.points.push_back({original.grid.points[k], raw, capped});
    }
    return rep;
}

inline BoundReport make_cd_model_report(const ExplanationCurve& original,
                                        const PredictionBound& pb, double sup_norm_domain) {
    BoundReport rep = make_pd_model_report(original, pb, sup_norm_domain);
    rep.kind = BoundKind::cd_model;
    return rep;
}

// Both accumulation model-change variants on the same grid; the gradient
// sup-norm form (B) never exceeds the Lipschitz-sum form (A).
inline std::pair<BoundReport, BoundReport> make_ale_model_reports(
    const ExplanationCurve& centered_original, const PredictionBound& pb, double sup_grad_norm,
    double L, double L2) {
    const double x_min = centered_original.grid.points.front();
    BoundReport a, b;
    a.kind = BoundKind::ale_model_A;
    b.kind = BoundKind::ale_model_B;
    for (BoundReport* r : {&a, &b}) {
        r->constants.A = pb.lower;
        r->constants.B = pb.upper;
        r->constants.L = L;
        r->constants.L2 = L2;
        r->constants.sup_grad_norm = sup_grad_norm;
        r->constants.x_min = x_min;
    }
    for (std::size_t k = 0; k < centered_original.size(); ++k) {
        double x = centered_original.grid.points[k];
        double g = centered_original.values[k];
        double raw_a = ale_model_bound_lipschitz(x, x_min, L, L2);
        double raw_b = ale_model_bound(x, x_min, sup_grad_norm);
        a.points.push_back({x, raw_a, detail::cap_or_raw(g, pb.lower, pb.upper, raw_a)});
        b.points.push_back({x, raw_b, detail::cap_or_raw(g, pb.lower, pb.upper, raw_b)});
    }
    return {a, b};
}

// ============================== Verification ==================================

struct Violation {
    std::size_t index = 0;
    double x = 0.0;
    double delta = 0.0;
    double bound = 0.0;
};

// Flags grid points where the observed explanation shift exceeds the capped
// bound plus tolerance. Points with an inestimable bound (NaN) are skipped.
inline std::vector<Violation> verify(const ExplanationCurve& c, const ExplanationCurve& c2,
                                     const BoundReport& report, double tolerance = 1e-6) {
    if (c.kind != c2.kind) throw std::invalid_argument("verify: curve kinds differ");
    if (!(c.grid == c2.grid)) throw std::invalid_argument("verify: curve grids differ");
    if (report.points.size() != c.size())
        throw std::invalid_argument("verify: report does not match curve grid");
    std::vector<Violation> out;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (!std::isfinite(report.points[k].capped)) continue;
        double delta = std::abs(c.values[k] - c2.values[k]);
        if (delta > report.points[k].capped + tolerance)
            out.push_back({k, c.grid.points[k], delta, report.points[k].capped});
    }
    return out;
}

// ============================== Export ========================================

inline void write_bound_csv(const std::vector<BoundReport>& reports, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_bound_csv: cannot write '" + path + "'");
    out << "kind,x_s,raw,capped\n";
    for (const auto& rep : reports)
        for (const auto& pt : rep.points)
            out << to_string(rep.kind) << ',' << format_real(pt.x, 17) << ','
                << format_real(pt.raw, 17) << ',' << format_real(pt.capped, 17) << '\n';
}

inline nlohmann::json bound_report_to_json(const BoundReport& rep) {
    nlohmann::json j;
    j["kind"] = to_string(rep.kind);
    nlohmann::json cs = nlohmann::json::object();
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v) cs[name] = *v;
    };
    put("A", rep.constants.A);
    put("B", rep.constants.B);
    put("L", rep.constants.L);
    put("L2", rep.constants.L2);
    put("dtv", rep.constants.dtv);
    put("max_conditional_dtv", rep.constants.max_conditional_dtv);
    put("z_star", rep.constants.z_star);
    put("sup_norm", rep.constants.sup_norm);
    put("sup_grad_norm", rep.constants.sup_grad_norm);
    put("x_min", rep.constants.x_min);
    if (!rep.constants.tv_method.empty()) cs["tv_method"] = rep.constants.tv_method;
    j["constants"] = cs;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : rep.points) {
        nlohmann::json e;
        e["x_s"] = pt.x;
        if (std::isfinite(pt.raw)) {
            e["raw"] = pt.raw;
            e["capped"] = pt.capped;
        } else {
            e["raw"] = nullptr;
            e["capped"] = nullptr;
        }
        pts.push_back(e);
    }
    j["points"] = pts;
    return j;
}

}  // namespace effectlab
