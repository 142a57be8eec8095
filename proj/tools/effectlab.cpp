// effectlab command line: feature effect curves, robustness bounds,
// data-poisoning attacks and model randomization tests on CSV data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "effectlab/effectlab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace effectlab;

namespace {

struct CommonArgs {
    std::string data;
    std::optional<std::string> label;
    std::string out = "out";
    std::uint64_t seed = 0;
};

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, const json& manifest) {
    std::ofstream f(dir / "manifest.json");
    f << manifest.dump(2) << '\n';
}

Dataset load_data(const CommonArgs& args) { return load_csv(args.data, args.label); }

Grid build_grid(const Dataset& ds, std::size_t feature, std::size_t m, const std::string& kind) {
    GridKind gk = kind == "equidistant" ? GridKind::equidistant : GridKind::quantile;
    return make_grid(ds, feature, m, gk);
}

// ----------------------------------------------------------------------------

int cmd_effect(const CommonArgs& common, const std::string& model_path, const std::string& kind,
               const std::string& feature, std::size_t grid_size, const std::string& grid_kind,
               std::optional<double> epsilon, bool uncentered) {
    Dataset ds = load_data(common);
    MlpModel model = load_model(model_path);
    std::size_t j = ds.feature_index(feature);
    Grid grid = build_grid(ds, j, grid_size, grid_kind);
    EffectKind ek = effect_kind_from_string(kind);

    json manifest;
    manifest["command"] = "effect";
    manifest["data"] = common.data;
    manifest["model"] = model_path;
    manifest["kind"] = kind;
    manifest["feature"] = ds.feature_names()[j];
    manifest["grid_size"] = grid_size;
    manifest["grid_kind"] = grid_kind;
    manifest["seed"] = common.seed;
    manifest["centered"] = !uncentered;

    ExplanationCurve curve = [&] {
        switch (ek) {
            case EffectKind::pd: return pd(model, ds, FeatureSet::single(j), grid);
            case EffectKind::cd: {
                double eps = epsilon ? *epsilon : default_epsilon(ds, j);
                if (!epsilon) manifest["warning"] = "epsilon not given, using default";
                manifest["epsilon"] = eps;
                return cd(model, ds, FeatureSet::single(j), grid, eps);
            }
            case EffectKind::ale: return ale(model, ds, j, grid);
            case EffectKind::dale: return dale(model, ds, j, grid);
        }
        throw std::logic_error("unreachable");
    }();
    if ((ek == EffectKind::ale || ek == EffectKind::dale) && !uncentered)
        curve = center(curve, model, ds);

    fs::path dir = ensure_out_dir(common.out);
    write_curve_csv(curve, (dir / "curves.csv").string());
    write_curve_json(curve, (dir / "curves.json").string());
    write_manifest(dir, manifest);
    return 0;
}

// ----------------------------------------------------------------------------

int cmd_bound(const CommonArgs& common, const std::string& data2_path,
              const std::string& model_path, const std::string& model2_path,
              const std::string& kind, const std::string& feature, std::size_t grid_size,
              const std::string& grid_kind, std::optional<double> epsilon, std::size_t bins) {
    if (data2_path.empty() == model2_path.empty())
        throw std::runtime_error(
            "bound: give exactly one of --data2 (data perturbation) or --model2 (model perturbation)");
    Dataset ds = load_data(common);
    MlpModel model = load_model(model_path);
    std::size_t j = ds.feature_index(feature);
    FeatureSet s = FeatureSet::single(j);
    Grid grid = build_grid(ds, j, grid_size, grid_kind);
    double eps = epsilon ? *epsilon : default_epsilon(ds, j);
    PredictionBound pb = estimate_prediction_bounds(model, ds);
    auto rest = complement(ds.p(), s);

    json manifest;
    manifest["command"] = "bound";
    manifest["data"] = common.data;
    manifest["model"] = model_path;
    manifest["kind"] = kind;
    manifest["feature"] = ds.feature_names()[j];
    manifest["grid_size"] = grid_size;
    manifest["grid_kind"] = grid_kind;
    manifest["epsilon"] = eps;
    manifest["seed"] = common.seed;
    manifest["A"] = pb.lower;
    manifest["B"] = pb.upper;
    manifest["bound_method"] =
        pb.method == PredictionBound::Method::analytic ? "analytic" : "empirical";

    std::vector<BoundReport> reports;
    if (!data2_path.empty()) {
        Dataset ds2 = load_csv(data2_path, common.label);
        manifest["data2"] = data2_path;
        auto edges = make_shared_edges(ds, ds2, rest, bins);
        if (kind == "pd") {
            double dtv = empirical_tv_distance(ds, ds2, rest);
            double dtv_hist = tv_distance(build_histogram(ds, rest, edges),
                                          build_histogram(ds2, rest, edges));
            manifest["dtv_empirical"] = dtv;
            manifest["dtv_histogram"] = dtv_hist;
            auto curve = pd(model, ds, s, grid);
            reports.push_back(make_pd_data_report(curve, pb, dtv, "empirical"));
        } else if (kind == "cd") {
            auto curve = cd(model, ds, s, grid, eps);
            std::vector<double> per_point(grid.size());
            for (std::size_t k = 0; k < grid.size(); ++k) {
                auto tv = detail::try_conditional_tv(ds, ds2, s, grid.points[k], eps, edges);
                per_point[k] = tv ? *tv : std::numeric_limits<double>::quiet_NaN();
            }
            reports.push_back(make_cd_data_report(curve, pb, per_point));
        } else if (kind == "ale" || kind == "dale") {
            double L = estimate_lipschitz(model).value;
            auto [z_star, max_dtv] = max_conditional_tv(ds, ds2, s, grid, eps, edges);
            auto curve = center(ale(model, ds, j, grid), model, ds);
            manifest["L"] = L;
            manifest["z_star"] = z_star;
            manifest["max_conditional_dtv"] = max_dtv;
            reports.push_back(make_ale_data_report(curve, pb, L, max_dtv, z_star));
        } else {
            throw std::runtime_error("bound: unknown kind '" + kind + "'");
        }
    } else {
        MlpModel model2 = load_model(model2_path);
        manifest["model2"] = model2_path;
        if (kind == "pd") {
            double sup = sup_norm_difference(model, model2, ds);
            manifest["sup_norm"] = sup;
            auto curve = pd(model, ds, s, grid);
            reports.push_back(make_pd_model_report(curve, pb, sup));
        } else if (kind == "cd") {
            double sup = sup_norm_difference(model, model2, ds);
            manifest["sup_norm"] = sup;
            auto curve = cd(model, ds, s, grid, eps);
            reports.push_back(make_cd_model_report(curve, pb, sup));
        } else if (kind == "ale" || kind == "dale") {
            double sup_grad = sup_norm_gradient_difference(model, model2, ds, j);
            double L = estimate_lipschitz(model).value;
            double L2 = estimate_lipschitz(model2).value;
            manifest["sup_grad_norm"] = sup_grad;
            manifest["L"] = L;
            manifest["L2"] = L2;
            auto curve = center(ale(model, ds, j, grid), model, ds);
            auto [a, b] = make_ale_model_reports(curve, pb, sup_grad, L, L2);
            reports.push_back(a);
            reports.push_back(b);
        } else {
            throw std::runtime_error("bound: unknown kind '" + kind + "'");
        }
    }

    fs::path dir = ensure_out_dir(common.out);
    write_bound_csv(reports, (dir / "bounds.csv").string());
    json jreports = json::array();
    for (const auto& rep : reports) jreports.push_back(bound_report_to_json(rep));
    {
        std::ofstream f(dir / "bounds.json");
        f << jreports.dump(2) << '\n';
    }
    write_manifest(dir, manifest);
    return 0;
}

// ----------------------------------------------------------------------------

int cmd_attack(const CommonArgs& common, const std::string& model_path,
               const std::string& feature, double x_s, const std::string& kind,
               std::optional<double> target, std::size_t population, std::size_t iterations,
               std::vector<double> mutation_sigmas, std::vector<std::string> perturb,
               std::optional<double> epsilon, std::size_t repeats, double crossover_rate,
               bool no_elitism) {
    Dataset ds = load_data(common);
    MlpModel model = load_model(model_path);
    std::size_t j = ds.feature_index(feature);

    AttackConfig cfg{FeatureSet::single(j)};
    cfg.x_s = x_s;
    cfg.target = target;
    cfg.population_size = population;
    cfg.iterations = iterations;
    if (!mutation_sigmas.empty()) cfg.mutation_sigmas = mutation_sigmas;
    if (!perturb.empty()) {
        std::vector<std::size_t> cols;
        for (const auto& f : perturb) cols.push_back(ds.feature_index(f));
        cfg.perturbable = cols;
    }
    cfg.seed = common.seed;
    cfg.effect_kind = kind == "cd" ? EffectKind::cd : EffectKind::pd;
    if (epsilon) cfg.epsilon = *epsilon;
    cfg.crossover_rate = crossover_rate;
    cfg.elitism = !no_elitism;

    AttackResult result = ga_attack(model, ds, cfg);

    SweepConfig sc;
    sc.kind = cfg.effect_kind;
    if (epsilon) sc.epsilon = *epsilon;
    sc.perturbable = result.perturbable_used;
    sc.population_size = population;
    sc.iterations = iterations;
    sc.mutation_sigmas = cfg.mutation_sigmas;
    std::vector<std::uint64_t> seeds;
    for (std::size_t r = 0; r < repeats; ++r) seeds.push_back(common.seed + r);
    auto rows = sweep(model, ds, cfg.s, {x_s}, {"random", "ga"}, seeds, sc);

    json manifest;
    manifest["command"] = "attack";
    manifest["data"] = common.data;
    manifest["model"] = model_path;
    manifest["feature"] = ds.feature_names()[j];
    manifest["x_s"] = x_s;
    manifest["kind"] = kind;
    manifest["population"] = population;
    manifest["iterations"] = iterations;
    manifest["mutation_sigmas"] = cfg.mutation_sigmas;
    manifest["random_sigmas"] = sc.random_sigmas;
    manifest["seed"] = common.seed;
    manifest["repeats"] = repeats;
    manifest["crossover_rate"] = crossover_rate;
    manifest["elitism"] = cfg.elitism;
    manifest["target"] = result.target_used;
    manifest["perturbable"] = result.perturbable_used;
    if (cfg.effect_kind == EffectKind::cd)
        manifest["epsilon"] = epsilon ? *epsilon : default_epsilon(ds, j);

    json summary;
    summary["original_value"] = result.original_value;
    summary["final_value"] = result.final_value;
    summary["shift"] = result.shift;
    summary["tv_empirical"] = result.tv_empirical;
    summary["tv_histogram"] = result.tv_histogram;
    summary["evaluations"] = result.evaluations;
    summary["target"] = result.target_used;
    summary["fitness_history"] = result.fitness_history;

    fs::path dir = ensure_out_dir(common.out);
    save_csv(result.perturbed, (dir / "perturbed.csv").string());
    write_sweep_csv(rows, (dir / "sweep.csv").string());
    {
        std::ofstream f(dir / "attack.json");
        f << summary.dump(2) << '\n';
    }
    write_manifest(dir, manifest);
    std::cout << "shift " << format_real(result.shift) << " (original "
              << format_real(result.original_value) << " -> " << format_real(result.final_value)
              << ")\n";
    return 0;
}

// ----------------------------------------------------------------------------

int cmd_randomize(const CommonArgs& common, const std::string& model_path,
                  std::vector<std::string> features, std::vector<double> sigmas,
                  std::size_t repeats, std::size_t grid_size, const std::string& grid_kind,
                  std::optional<double> epsilon, const std::string& metric, bool weights_only) {
    Dataset ds = load_data(common);
    MlpModel model = load_model(model_path);
    if (sigmas.empty()) sigmas = {0.5};

    std::vector<std::size_t> cols;
    if (features.empty())
        for (std::size_t j = 0; j < ds.p(); ++j) cols.push_back(j);
    else
        for (const auto& f : features) cols.push_back(ds.feature_index(f));

    // features with too few unique values cannot carry a grid
    std::vector<std::size_t> usable;
    std::vector<Grid> grids;
    for (std::size_t j : cols) {
        auto col = ds.column(j);
        std::set<double> uniq(col.begin(), col.end());
        if (uniq.size() <= 2) {
            std::cerr << "warning: skipping feature '" << ds.feature_names()[j]
                      << "' (<= 2 unique values)\n";
            continue;
        }
        usable.push_back(j);
        grids.push_back(build_grid(ds, j, grid_size, grid_kind));
    }
    if (usable.empty()) throw std::runtime_error("randomize: no usable features");

    RandomizeConfig cfg;
    cfg.repeats = repeats;
    cfg.seed = common.seed;
    cfg.metric = metric_from_string(metric);
    cfg.weights_only = weights_only;
    if (epsilon) cfg.epsilon = *epsilon;

    auto reports = sigma_sweep(model, ds, usable, grids, sigmas, cfg);

    json manifest;
    manifest["command"] = "randomize";
    manifest["data"] = common.data;
    manifest["model"] = model_path;
    std::vector<std::string> names;
    for (std::size_t j : usable) names.push_back(ds.feature_names()[j]);
    manifest["features"] = names;
    manifest["sigmas"] = sigmas;
    manifest["repeats"] = repeats;
    manifest["grid_size"] = grid_size;
    manifest["grid_kind"] = grid_kind;
    manifest["metric"] = metric;
    manifest["weights_only"] = weights_only;
    manifest["perturbs_biases"] = !weights_only;
    manifest["seed"] = common.seed;
    if (epsilon) manifest["epsilon"] = *epsilon;

    fs::path dir = ensure_out_dir(common.out);
    write_randomize_csv(reports, (dir / "randomize.csv").string());
    write_manifest(dir, manifest);
    return 0;
}

// ----------------------------------------------------------------------------

int cmd_train(const CommonArgs& common, const std::string& layout, std::size_t epochs, double lr,
              const std::string& activation) {
    if (!common.label) throw std::runtime_error("train: --label is required");
    Dataset ds = load_data(common);
    std::vector<std::size_t> hidden;
    {
        std::stringstream ss(layout);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) hidden.push_back(std::stoul(tok));
    }
    Activation act = activation_from_string(activation);
    TrainResult tr = train_mlp(ds, hidden, epochs, lr, common.seed, act);

    json manifest;
    manifest["command"] = "train";
    manifest["data"] = common.data;
    manifest["label"] = *common.label;
    manifest["layout"] = hidden;
    manifest["epochs"] = epochs;
    manifest["learning_rate"] = lr;
    manifest["activation"] = activation;
    manifest["seed"] = common.seed;
    manifest["accuracy"] = tr.accuracy;
    manifest["loss"] = tr.loss;

    fs::path dir = ensure_out_dir(common.out);
    save_model(tr.model, (dir / "model.json").string());
    write_manifest(dir, manifest);
    std::cout << "accuracy " << format_real(tr.accuracy) << ", loss " << format_real(tr.loss)
              << "\n";
    return 0;
}

// ----------------------------------------------------------------------------

int cmd_xor_demo(const CommonArgs& common, const std::string& distribution, std::size_t grid_size,
                 std::size_t samples, double p1_min, double p1_max, double p2_min, double p2_max) {
    const bool uniform = distribution == "uniform";
    fs::path dir = ensure_out_dir(common.out);
    std::ofstream out(dir / "xor_demo.csv");
    out << (uniform ? "a,b" : "mu,sigma") << ",analytic,monte_carlo,abs_error\n";

    XorModel model;
    double worst = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        double p1 = p1_min + (p1_max - p1_min) * static_cast<double>(i) /
                                 static_cast<double>(grid_size - 1);
        for (std::size_t k = 0; k < grid_size; ++k) {
            double p2 = p2_min + (p2_max - p2_min) * static_cast<double>(k) /
                                     static_cast<double>(grid_size - 1);
            Rng rng(derive_seed(common.seed, i * grid_size + k));
            std::vector<double> values(samples * 2);
            for (std::size_t r = 0; r < samples; ++r) {
                values[r * 2] = r % 2 == 0 ? 1.0 : -1.0;
                values[r * 2 + 1] = uniform ? rng.uniform(p1, p2) : rng.normal(p1, p2);
            }
            Dataset ds(std::move(values), {"x1", "x2"});
            Grid grid{{-1.0, 1.0}, GridKind::equidistant};
            auto curve = pd(model, ds, FeatureSet::single(0), grid);
            double mc = curve.values[1];  // value at x1 = 1
            double exact = uniform ? xor_pd_uniform(p1, p2, 1.0) : xor_pd_normal(p1, p2, 1.0);
            double err = std::abs(mc - exact);
            worst = std::max(worst, err);
            out << format_real(p1, 17) << ',' << format_real(p2, 17) << ','
                << format_real(exact, 17) << ',' << format_real(mc, 17) << ','
                << format_real(err, 17) << '\n';
        }
    }

    json manifest;
    manifest["command"] = "xor-demo";
    manifest["distribution"] = distribution;
    manifest["grid_size"] = grid_size;
    manifest["samples"] = samples;
    manifest["param1_range"] = {p1_min, p1_max};
    manifest["param2_range"] = {p2_min, p2_max};
    manifest["seed"] = common.seed;
    manifest["max_abs_error"] = worst;
    write_manifest(dir, manifest);
    std::cout << "max abs error " << format_real(worst) << "\n";
    return 0;
}

// ----------------------------------------------------------------------------

int cmd_synth(const CommonArgs& common, std::size_t n, std::size_t p, double correlation,
              const std::string& rule) {
    Dataset ds = gen_synthetic(n, p, correlation, label_rule_from_string(rule), common.seed);
    fs::path dir = ensure_out_dir(common.out);
    save_csv(ds, (dir / "data.csv").string());
    json manifest;
    manifest["command"] = "synth";
    manifest["n"] = n;
    manifest["p"] = p;
    manifest["correlation"] = correlation;
    manifest["rule"] = rule;
    manifest["seed"] = common.seed;
    write_manifest(dir, manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"global feature effect curves and their robustness"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string model_path, model2_path, data2_path;
    std::string kind = "pd", feature, grid_kind = "quantile", metric = "max-abs";
    std::string distribution = "uniform", layout = "16,8", activation = "relu", rule = "linear";
    std::size_t grid_size = 20, population = 100, iterations = 200, repeats = 20, bins = 0;
    std::size_t epochs = 300, samples = 10000, n = 5000, p = 20;
    double x_s = 0.0, lr = 0.5, correlation = 0.0, crossover_rate = 0.5;
    double p1_min = 0.0, p1_max = 0.0, p2_min = 0.0, p2_max = 0.0;
    bool uncentered = false, weights_only = false, no_elitism = false;
    std::optional<double> epsilon, target;
    std::vector<double> sigmas, mutation_sigmas;
    std::vector<std::string> features, perturb;

    auto add_common = [&](CLI::App* cmd, bool needs_data = true) {
        if (needs_data) {
            cmd->add_option("--data", common.data, "input CSV")->required();
            cmd->add_option("--label", common.label, "label column name");
        }
        cmd->add_option("--seed", common.seed, "random seed");
        cmd->add_option("--out", common.out, "output directory");
    };

    auto* effect = app.add_subcommand("effect", "estimate one feature effect curve");
    add_common(effect);
    effect->add_option("--model", model_path, "model JSON")->required();
    effect->add_option("--kind", kind, "pd|cd|ale|dale")->required();
    effect->add_option("--feature", feature, "feature name or index")->required();
    effect->add_option("--grid-size", grid_size, "number of grid points");
    effect->add_option("--grid-kind", grid_kind, "quantile|equidistant");
    effect->add_option("--epsilon", epsilon, "cd neighborhood width");
    effect->add_flag("--uncentered", uncentered, "skip centering of ale/dale");

    auto* bound = app.add_subcommand("bound", "theoretical robustness bounds");
    add_common(bound);
    bound->add_option("--data2", data2_path, "perturbed CSV (data bounds)");
    bound->add_option("--model", model_path, "model JSON")->required();
    bound->add_option("--model2", model2_path, "perturbed model JSON (model bounds)");
    bound->add_option("--kind", kind, "pd|cd|ale")->required();
    bound->add_option("--feature", feature, "feature name or index")->required();
    bound->add_option("--grid-size", grid_size, "number of grid points");
    bound->add_option("--grid-kind", grid_kind, "quantile|equidistant");
    bound->add_option("--epsilon", epsilon, "conditional neighborhood width");
    bound->add_option("--bins", bins, "histogram bins per dimension (0 = auto)");

    auto* attack = app.add_subcommand("attack", "genetic data-poisoning attack");
    add_common(attack);
    attack->add_option("--model", model_path, "model JSON")->required();
    attack->add_option("--feature", feature, "explained feature")->required();
    attack->add_option("--x-s", x_s, "grid value under attack")->required();
    attack->add_option("--kind", kind, "pd|cd");
    attack->add_option("--target", target, "attack target value (default: auto)");
    attack->add_option("--population", population, "population size");
    attack->add_option("--iterations", iterations, "iterations");
    attack->add_option("--sigma", mutation_sigmas, "mutation noise levels (repeatable)");
    attack->add_option("--perturb", perturb, "perturbable features (repeatable)");
    attack->add_option("--epsilon", epsilon, "cd neighborhood width");
    attack->add_option("--repeats", repeats, "sweep repeats")->default_val(5);
    attack->add_option("--crossover-rate", crossover_rate, "per-cell swap probability");
    attack->add_flag("--no-elitism", no_elitism, "disable elitism");

    auto* randomize = app.add_subcommand("randomize", "model parameter randomization test");
    add_common(randomize);
    randomize->add_option("--model", model_path, "model JSON")->required();
    randomize->add_option("--feature", features, "features to explain (repeatable)");
    randomize->add_option("--sigma", sigmas, "noise levels (repeatable, default 0.5)");
    randomize->add_option("--repeats", repeats, "repeats per stage");
    randomize->add_option("--grid-size", grid_size, "number of grid points");
    randomize->add_option("--grid-kind", grid_kind, "quantile|equidistant");
    randomize->add_option("--epsilon", epsilon, "cd neighborhood width");
    randomize->add_option("--metric", metric, "max-abs|l2-mean");
    randomize->add_flag("--weights-only", weights_only, "leave biases unperturbed");

    auto* train = app.add_subcommand("train", "train the built-in classifier");
    add_common(train);
    train->add_option("--layout", layout, "hidden layer sizes, comma separated");
    train->add_option("--epochs", epochs, "training epochs");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--activation", activation, "hidden activation: relu|tanh");

    auto* xor_demo = app.add_subcommand("xor-demo", "analytic vs Monte-Carlo effect values");
    add_common(xor_demo, false);
    xor_demo->add_option("--distribution", distribution, "uniform|normal");
    xor_demo->add_option("--grid-size", grid_size, "parameter grid resolution per axis");
    xor_demo->add_option("--samples", samples, "Monte-Carlo sample count");
    xor_demo->add_option("--p1-min", p1_min, "first parameter range start");
    xor_demo->add_option("--p1-max", p1_max, "first parameter range end");
    xor_demo->add_option("--p2-min", p2_min, "second parameter range start");
    xor_demo->add_option("--p2-max", p2_max, "second parameter range end");

    auto* synth = app.add_subcommand("synth", "generate a correlated Gaussian dataset");
    add_common(synth, false);
    synth->add_option("--n", n, "rows");
    synth->add_option("--p", p, "features");
    synth->add_option("--correlation", correlation, "pairwise correlation");
    synth->add_option("--rule", rule, "label rule: linear|xor");

    CLI11_PARSE(app, argc, argv);

    try {
        if (effect->parsed())
            return cmd_effect(common, model_path, kind, feature, grid_size, grid_kind, epsilon,
                              uncentered);
        if (bound->parsed())
            return cmd_bound(common, data2_path, model_path, model2_path, kind, feature,
                             grid_size, grid_kind, epsilon, bins);
        if (attack->parsed())
            return cmd_attack(common, model_path, feature, x_s, kind, target, population,
                              iterations, mutation_sigmas, perturb, epsilon, repeats,
                              crossover_rate, no_elitism);
        if (randomize->parsed())
            return cmd_randomize(common, model_path, features, sigmas, repeats, grid_size,
                                 grid_kind, epsilon, metric, weights_only);
        if (train->parsed()) return cmd_train(common, layout, epochs, lr, activation);
        if (xor_demo->parsed()) {
            const bool uniform = distribution == "uniform";
            if (p1_min == 0.0 && p1_max == 0.0) {
                p1_min = -3.0;
                p1_max = uniform ? 0.0 : 3.0;
            }
            if (p2_min == 0.0 && p2_max == 0.0) {
                p2_min = 0.15;
                p2_max = 3.0;
            }
            return cmd_xor_demo(common, distribution, grid_size, samples, p1_min, p1_max, p2_min,
                                p2_max);
        }
        if (synth->parsed()) return cmd_synth(common, n, p, correlation, rule);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
