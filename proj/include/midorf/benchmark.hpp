#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "midorf/baselines.hpp"
#include "midorf/metrics.hpp"
#include "midorf/synthgen.hpp"

namespace midorf {

struct BenchmarkConfig {
    SynthConfig synth;
    TrainConfig train;                            // alpha_grid drives selection
    std::vector<Method> methods = all_methods();
    std::filesystem::path out_dir;                // empty = no files written
};

struct MethodBenchmark {
    Method method = Method::MiDorf;
    MetricsReport mean;                     // averaged over datasets
    std::vector<MetricsReport> per_dataset;
    std::vector<double> selected_alphas;
    long mior_violations = 0;  // test frames predicted above the bag prediction
    std::vector<std::string> failures;
};

struct BenchmarkResult {
    std::vector<MethodBenchmark> methods;
    int datasets = 0;
    double wall_seconds = 0.0;
};

// Generates the synthetic suite, trains every requested method per dataset
// with alpha selected on validation, evaluates on test and averages the
// reports. Per-method failures are recorded and the run continues.
BenchmarkResult run_benchmark(const BenchmarkConfig& config, std::ostream& log);

// Predictions of a trained model over a whole dataset (parallel over bags).
std::vector<BagPrediction> predict_dataset(const TrainedModel& model, const Dataset& ds,
                                           Exec exec = Exec::Parallel);

std::string benchmark_table(const BenchmarkResult& result);
std::string benchmark_to_json(const BenchmarkResult& result);

}  // namespace midorf
