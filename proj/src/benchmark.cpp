#include "midorf/benchmark.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "midorf/io.hpp"
#include "midorf/parallel.hpp"

namespace midorf {

using nlohmann::json;

namespace {

std::optional<double> mean_optional(const std::vector<MetricsReport>& reports,
                                    std::optional<double> MetricsReport::*field) {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : reports)
        if ((r.*field).has_value()) {
            sum += *(r.*field);
            ++n;
        }
    if (n == 0) return std::nullopt;
    return sum / n;
}

double mean_value(const std::vector<MetricsReport>& reports, double MetricsReport::*field) {
    double sum = 0.0;
    for (const auto& r : reports) sum += r.*field;
    return reports.empty() ? 0.0 : sum / static_cast<double>(reports.size());
}

MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
    MetricsReport mean;
    if (reports.empty()) return mean;
    mean.has_frame = true;
    for (const auto& r : reports) mean.has_frame = mean.has_frame && r.has_frame;
    mean.frame_corr = mean_optional(reports, &MetricsReport::frame_corr);
    mean.frame_icc = mean_optional(reports, &MetricsReport::frame_icc);
    mean.frame_mae = mean_value(reports, &MetricsReport::frame_mae);
    mean.seq_corr = mean_optional(reports, &MetricsReport::seq_corr);
    mean.seq_icc = mean_optional(reports, &MetricsReport::seq_icc);
    mean.seq_mae = mean_value(reports, &MetricsReport::seq_mae);
    mean.seq_acc = mean_value(reports, &MetricsReport::seq_acc);
    mean.seq_f1 = mean_value(reports, &MetricsReport::seq_f1);
    for (const auto& r : reports) {
        mean.frames += r.frames;
        mean.sequences += r.sequences;
    }
    return mean;
}

long count_mior_violations(const std::vector<BagPrediction>& preds) {
    long violations = 0;
    for (const auto& p : preds)
        for (Level l : p.frame_preds)
            if (l > p.bag_pred) ++violations;
    return violations;
}

json report_json_fragment(const MetricsReport& r) {
    return json::parse(report_to_json(r));
}

}  // namespace

std::vector<BagPrediction> predict_dataset(const TrainedModel& model, const Dataset& ds,
                                           Exec exec) {
    std::vector<BagPrediction> out(ds.bags.size());
    std::exception_ptr error;
    parallel_for(ds.num_bags(), exec, [&](int i) {
        try {
            const Bag& bag = ds.bags[static_cast<size_t>(i)];
            BagPrediction p;
            p.id = bag.id;
            p.bag_pred = predict_bag(model, bag);
            p.frame_preds = predict_instances(model, bag);
            if (auto post = bag_posterior(model, bag); post.has_value())
                p.bag_posterior.assign(post->data(), post->data() + post->size());
            out[static_cast<size_t>(i)] = std::move(p);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    });
    if (error) std::rethrow_exception(error);
    return out;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    const bool writing = !config.out_dir.empty();
    if (writing) std::filesystem::create_directories(config.out_dir);

    BenchmarkResult result;
    result.datasets = config.synth.num_datasets;
    result.methods.reserve(config.methods.size());
    for (Method m : config.methods) {
        MethodBenchmark mb;
        mb.method = m;
        result.methods.push_back(std::move(mb));
    }

    for (int i = 0; i < config.synth.num_datasets; ++i) {
        const SynthDataset ds = generate_dataset(config.synth, i);
        const std::filesystem::path ds_dir = config.out_dir / ("ds" + std::to_string(i));
        if (writing) {
            std::filesystem::create_directories(ds_dir);
            save_dataset_jsonl(ds.test, ds_dir / "test.jsonl");
        }
        for (auto& mb : result.methods) {
            const std::string name = to_string(mb.method);
            try {
                TrainConfig tc = config.train;
                tc.seed = config.train.seed + static_cast<std::uint64_t>(i) * 1000003ULL;
                GridSelection sel = train_with_alpha_grid(mb.method, ds.train, ds.val, tc);
                const std::vector<BagPrediction> preds =
                    predict_dataset(sel.model, ds.test, tc.exec);
                const MetricsReport report = evaluate(preds, ds.test);
                mb.per_dataset.push_back(report);
                mb.selected_alphas.push_back(sel.alpha);
                mb.mior_violations += count_mior_violations(preds);
                if (writing) {
                    save_predictions(preds, ds_dir / (name + ".preds.jsonl"));
                    std::ofstream rep(ds_dir / (name + ".report.json"));
                    rep << report_to_json(report) << '\n';
                }
                log << "[ds " << i << "] " << name << ": alpha=" << sel.alpha
                    << " seq_acc=" << report.seq_acc;
                if (report.frame_icc.has_value()) log << " frame_icc=" << *report.frame_icc;
                log << std::endl;
            } catch (const std::exception& e) {
                mb.failures.push_back("ds" + std::to_string(i) + ": " + e.what());
                log << "[ds " << i << "] " << name << ": FAILED: " << e.what() << std::endl;
            }
        }
    }

    for (auto& mb : result.methods) mb.mean = mean_report(mb.per_dataset);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (writing) {
        std::ofstream summary(config.out_dir / "summary.json");
        summary << benchmark_to_json(result) << '\n';
        std::ofstream table(config.out_dir / "summary.txt");
        table << benchmark_table(result);
    }
    return result;
}

std::string benchmark_table(const BenchmarkResult& result) {
    std::ostringstream os;
    auto cell = [](const std::optional<double>& v) {
        std::ostringstream c;
        if (v.has_value())
            c << std::fixed << std::setprecision(2) << std::setw(5) << *v;
        else
            c << "  n/a";
        return c.str();
    };
    os << "                 frame-level          sequence-level\n";
    os << "method        CORR   MAE   ICC    CORR   MAE   ICC   ACC    F1\n";
    for (const auto& mb : result.methods) {
        os << std::left << std::setw(12) << to_string(mb.method) << std::right;
        if (mb.per_dataset.empty()) {
            os << "  (no completed runs)\n";
            continue;
        }
        const MetricsReport& r = mb.mean;
        os << " " << cell(r.frame_corr) << " " << cell(r.frame_mae) << " " << cell(r.frame_icc)
           << "   " << cell(r.seq_corr) << " " << cell(r.seq_mae) << " " << cell(r.seq_icc)
           << " " << cell(r.seq_acc) << " " << cell(r.seq_f1) << "\n";
    }
    os << "(means over " << result.datasets << " datasets; "
       << std::fixed << std::setprecision(1) << result.wall_seconds << "s)\n";
    return os.str();
}

std::string benchmark_to_json(const BenchmarkResult& result) {
    json doc;
    doc["datasets"] = result.datasets;
    doc["wall_seconds"] = result.wall_seconds;
    json methods = json::array();
    for (const auto& mb : result.methods) {
        json m;
        m["method"] = to_string(mb.method);
        m["mean"] = report_json_fragment(mb.mean);
        json per = json::array();
        for (const auto& r : mb.per_dataset) per.push_back(report_json_fragment(r));
        m["per_dataset"] = std::move(per);
        m["selected_alphas"] = mb.selected_alphas;
        m["mior_violations"] = mb.mior_violations;
        m["failures"] = mb.failures;
        methods.push_back(std::move(m));
    }
    doc["methods"] = std::move(methods);
    return doc.dump(2);
}

}  // namespace midorf
