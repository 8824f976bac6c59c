#include "midorf/commands.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "midorf/benchmark.hpp"
#include "midorf/io.hpp"

namespace midorf {

using nlohmann::json;

namespace {

SynthConfig synth_config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    SynthConfig cfg;
    cfg.num_datasets = doc.value("num_datasets", cfg.num_datasets);
    cfg.n_train = doc.value("n_train", cfg.n_train);
    cfg.n_test = doc.value("n_test", cfg.n_test);
    cfg.n_val = doc.value("n_val", cfg.n_val);
    if (doc.contains("length_range")) {
        cfg.min_length = doc["length_range"].at(0).get<int>();
        cfg.max_length = doc["length_range"].at(1).get<int>();
    }
    cfg.feature_dim = doc.value("feature_dim", cfg.feature_dim);
    cfg.num_levels = doc.value("num_levels", cfg.num_levels);
    cfg.noise_sigma = doc.value("noise_sigma", cfg.noise_sigma);
    cfg.pool_size = doc.value("pool_size", cfg.pool_size);
    return cfg;
}

json truth_to_json(const GeneratorTruth& truth) {
    json t;
    json rows = json::array();
    for (Eigen::Index r = 0; r < truth.transition.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < truth.transition.cols(); ++c)
            row.push_back(truth.transition(r, c));
        rows.push_back(std::move(row));
    }
    t["transition"] = std::move(rows);
    json beta = json::array();
    for (Eigen::Index i = 0; i < truth.beta.size(); ++i) beta.push_back(truth.beta[i]);
    t["beta"] = std::move(beta);
    t["cutpoints"] = truth.cutpoints;
    return t;
}

struct GenerateArgs {
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string config_file;
};

int cmd_generate(const GenerateArgs& args) {
    SynthConfig cfg = args.config_file.empty() ? SynthConfig{}
                                               : synth_config_from_file(args.config_file);
    cfg.seed = args.seed;
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);

    json manifest;
    manifest["seed"] = cfg.seed;
    manifest["config"] = {{"num_datasets", cfg.num_datasets}, {"n_train", cfg.n_train},
                          {"n_test", cfg.n_test},             {"n_val", cfg.n_val},
                          {"length_range", {cfg.min_length, cfg.max_length}},
                          {"feature_dim", cfg.feature_dim},   {"num_levels", cfg.num_levels},
                          {"noise_sigma", cfg.noise_sigma},   {"pool_size", cfg.pool_size}};
    json datasets = json::array();
    for (int i = 0; i < cfg.num_datasets; ++i) {
        const SynthDataset ds = generate_dataset(cfg, i);
        const std::string stem = "ds" + std::to_string(i);
        save_dataset_jsonl(ds.train, dir / (stem + ".train.jsonl"));
        save_dataset_jsonl(ds.test, dir / (stem + ".test.jsonl"));
        save_dataset_jsonl(ds.val, dir / (stem + ".val.jsonl"));
        json item;
        item["index"] = i;
        item["train"] = stem + ".train.jsonl";
        item["test"] = stem + ".test.jsonl";
        item["val"] = stem + ".val.jsonl";
        item["generator"] = truth_to_json(ds.truth);
        datasets.push_back(std::move(item));
        std::cerr << "wrote dataset " << i << "\n";
    }
    manifest["datasets"] = std::move(datasets);
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    return kExitOk;
}

struct TrainArgs {
    std::string method = "midorf";
    std::string train_file, val_file, out_file;
    std::uint64_t seed = 0;
    std::optional<double> alpha;
    std::vector<double> alpha_grid;
    std::optional<int> levels;
    int max_iterations = 500;
    double tolerance = 1e-5;
    int restarts = 1;
};

int cmd_train(const TrainArgs& args) {
    const Method method = method_from_string(args.method);
    const Dataset train = load_dataset_jsonl(args.train_file, args.levels);
    require_valid(train);

    TrainConfig config;
    config.seed = args.seed;
    config.max_iterations = args.max_iterations;
    config.gradient_tolerance = args.tolerance;
    config.restarts = args.restarts;
    if (!args.alpha_grid.empty()) config.alpha_grid = args.alpha_grid;

    TrainedModel model;
    double used_alpha = 0.0;
    const bool grid_mode = !args.alpha_grid.empty() || (!args.alpha && !args.val_file.empty());
    if (grid_mode) {
        if (args.val_file.empty())
            throw DataError("--alpha-grid requires --val for the selection");
        Dataset val = load_dataset_jsonl(args.val_file, std::optional<int>(train.scale.num_levels));
        GridSelection sel = train_with_alpha_grid(method, train, val, config);
        model = std::move(sel.model);
        used_alpha = sel.alpha;
    } else {
        config.alpha = args.alpha.value_or(1.0);
        model = train_method(method, train, config);
        used_alpha = config.alpha;
    }

    save_model(model, TrainMeta{args.seed, used_alpha, model.trace.iterations}, args.out_file);

    json trace;
    trace["objective"] = model.trace.objective;
    trace["grad_norm"] = model.trace.grad_norm;
    trace["iterations"] = model.trace.iterations;
    trace["converged"] = model.trace.converged;
    trace["wall_seconds"] = model.trace.wall_seconds;
    trace["alpha"] = used_alpha;
    std::ofstream sidecar(args.out_file + ".trace.json");
    sidecar << trace.dump(2) << '\n';

    if (!model.trace.converged)
        std::cerr << "warning: optimizer stopped at the iteration budget (gradient norm above "
                     "tolerance); best iterate written\n";
    return kExitOk;
}

struct PredictArgs {
    std::string model_file, data_file, out_file;
    std::string level = "both";
};

int cmd_predict(const PredictArgs& args) {
    const TrainedModel model = load_model(args.model_file);
    const Dataset data = load_dataset_jsonl(args.data_file, std::optional<int>(model.num_levels));
    require_valid(data);
    if (data.feature_dim != model.feature_dim)
        throw DataError("model expects feature_dim " + std::to_string(model.feature_dim) +
                        ", data has " + std::to_string(data.feature_dim));
    const std::vector<BagPrediction> preds = predict_dataset(model, data);
    save_predictions(preds, args.out_file, args.level != "sequence", args.level != "frame");
    return kExitOk;
}

struct EvaluateArgs {
    std::string pred_file, data_file, out_file;
    std::optional<int> levels;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const std::vector<BagPrediction> preds = load_predictions(args.pred_file);
    const Dataset data = load_dataset_jsonl(args.data_file, args.levels);
    const MetricsReport report = evaluate(preds, data);
    std::ofstream out(args.out_file);
    if (!out) throw DataError("cannot open '" + args.out_file + "' for writing");
    out << report_to_json(report) << '\n';
    std::cout << report_table(report);
    return kExitOk;
}

struct BenchmarkArgs {
    std::uint64_t seed = 0;
    std::string out_dir;
    std::vector<std::string> methods;
    std::string config_file;
    int max_iterations = 500;
    double tolerance = 1e-5;
};

int cmd_benchmark(const BenchmarkArgs& args) {
    BenchmarkConfig config;
    if (!args.config_file.empty()) config.synth = synth_config_from_file(args.config_file);
    config.synth.seed = args.seed;
    config.train.seed = args.seed;
    config.train.max_iterations = args.max_iterations;
    config.train.gradient_tolerance = args.tolerance;
    config.out_dir = args.out_dir;
    if (!args.methods.empty()) {
        config.methods.clear();
        for (const std::string& name : args.methods)
            config.methods.push_back(method_from_string(name));
    }
    const BenchmarkResult result = run_benchmark(config, std::cerr);
    std::cout << benchmark_table(result);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Weakly-supervised ordinal sequence models: multi-instance dynamic ordinal "
                 "random fields and baselines"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic benchmark suite");
    generate->add_option("--out", gen.out_dir, "output directory")->required();
    generate->add_option("--seed", gen.seed, "master seed");
    generate->add_option("--config", gen.config_file, "JSON generator configuration");

    TrainArgs tr;
    CLI::App* train = app.add_subcommand("train", "fit a model");
    train->add_option("--method", tr.method, "model")
        ->check(CLI::IsMember({"midorf", "sil-or", "mi-or", "mir", "mi-hcrf", "hcrf", "hcorf"}))
        ->required();
    train->add_option("--train", tr.train_file, "training JSONL")->required();
    train->add_option("--val", tr.val_file, "validation JSONL (enables alpha selection)");
    train->add_option("--out", tr.out_file, "model file to write")->required();
    train->add_option("--seed", tr.seed, "seed");
    double alpha_value = 0.0;
    CLI::Option* alpha_opt = train->add_option("--alpha", alpha_value, "fixed ridge weight");
    train->add_option("--alpha-grid", tr.alpha_grid, "explicit alpha grid for selection");
    int levels_value = 0;
    CLI::Option* levels_opt =
        train->add_option("--levels", levels_value, "ordinal levels (default: inferred)");
    train->add_option("--max-iter", tr.max_iterations, "optimizer iteration budget");
    train->add_option("--tol", tr.tolerance, "gradient tolerance");
    train->add_option("--restarts", tr.restarts, "optimizer restarts");

    PredictArgs pr;
    CLI::App* predict = app.add_subcommand("predict", "predict labels with a trained model");
    predict->add_option("--model", pr.model_file, "model file")->required();
    predict->add_option("--data", pr.data_file, "data JSONL")->required();
    predict->add_option("--out", pr.out_file, "predictions JSONL")->required();
    predict->add_option("--level", pr.level, "frame|sequence|both")
        ->check(CLI::IsMember({"frame", "sequence", "both"}));

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
    evaluate->add_option("--pred", ev.pred_file, "predictions JSONL")->required();
    evaluate->add_option("--data", ev.data_file, "data JSONL with ground truth")->required();
    evaluate->add_option("--out", ev.out_file, "report JSON to write")->required();
    int ev_levels = 0;
    CLI::Option* ev_levels_opt = evaluate->add_option("--levels", ev_levels, "ordinal levels");

    BenchmarkArgs bm;
    CLI::App* benchmark = app.add_subcommand("benchmark", "full multi-method comparison run");
    benchmark->add_option("--seed", bm.seed, "master seed");
    benchmark->add_option("--out", bm.out_dir, "output directory")->required();
    benchmark->add_option("--methods", bm.methods, "subset of methods");
    benchmark->add_option("--config", bm.config_file, "JSON generator configuration");
    benchmark->add_option("--max-iter", bm.max_iterations, "optimizer iteration budget");
    benchmark->add_option("--tol", bm.tolerance, "gradient tolerance");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(gen);
        if (*train) {
            if (alpha_opt->count() > 0) tr.alpha = alpha_value;
            if (levels_opt->count() > 0) tr.levels = levels_value;
            return cmd_train(tr);
        }
        if (*predict) return cmd_predict(pr);
        if (*evaluate) {
            if (ev_levels_opt->count() > 0) ev.levels = ev_levels;
            return cmd_evaluate(ev);
        }
        if (*benchmark) return cmd_benchmark(bm);
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace midorf
