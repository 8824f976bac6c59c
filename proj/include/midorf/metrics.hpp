#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "midorf/model.hpp"

namespace midorf {

// Undefined metric (constant input, too few points, zero variance).
struct MetricsError : std::domain_error {
    using std::domain_error::domain_error;
};

double pearson_corr(std::span<const double> pred, std::span<const double> truth);

// ICC(3,1): two-way mixed, consistency, two raters. Invariant to an additive
// shift of either rater.
double icc_consistency(std::span<const double> pred, std::span<const double> truth);

double mean_absolute_error(std::span<const double> pred, std::span<const double> truth);

double accuracy(std::span<const Level> pred, std::span<const Level> truth);

// Unweighted mean of per-class F1 over the classes present in pred or truth;
// classes absent from both are excluded from the mean.
double f1_macro(std::span<const Level> pred, std::span<const Level> truth, int num_levels);

// One method's predictions for one bag (all levels 1-based internal).
struct BagPrediction {
    std::string id;
    Level bag_pred = 1;
    std::vector<Level> frame_preds;
    std::vector<double> bag_posterior;  // empty for non-probabilistic methods
};

struct MetricsReport {
    bool has_frame = false;
    std::optional<double> frame_corr, frame_icc;
    double frame_mae = 0.0;
    std::optional<double> seq_corr, seq_icc;
    double seq_mae = 0.0;
    double seq_acc = 0.0;
    double seq_f1 = 0.0;
    long frames = 0;
    long sequences = 0;
    std::vector<std::string> flags;  // undefined-metric notes
};

// Joins predictions to bags by id (missing ids are an error). Frame metrics
// pool all frames across the bags that carry instance labels; the frame block
// is omitted (with a flag) when none do.
MetricsReport evaluate(const std::vector<BagPrediction>& predictions, const Dataset& ds);

}  // namespace midorf
