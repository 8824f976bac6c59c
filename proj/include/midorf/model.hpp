#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace midorf {

// Ordinal levels are 1..L internally. File formats use 0..L-1; the offset is
// applied exactly once at the IO boundary (see io.hpp).
using Level = int;

struct OrdinalScale {
    int num_levels = 2;  // L >= 2
};

// One temporal sequence (bag) of feature vectors with a single ordinal label.
// instance_labels, when present, are evaluation ground truth only; training
// code receives bags through training_view() which strips them.
struct Bag {
    std::string id;
    Eigen::MatrixXd instances;  // T x d, row t = feature vector of instance t
    Level bag_label = 1;
    std::vector<Level> instance_labels;  // empty, or exactly T entries

    int length() const { return static_cast<int>(instances.rows()); }
    int dim() const { return static_cast<int>(instances.cols()); }
};

struct Dataset {
    std::vector<Bag> bags;
    OrdinalScale scale{2};
    int feature_dim = 0;

    int num_bags() const { return static_cast<int>(bags.size()); }
};

struct LatentAssignment {
    std::vector<Level> states;  // h_t in 1..L, length T
};

// All learnable parameters of the sequence model. Interior cut-points are
// stored as (first_cut, log_gaps): b_1 = first_cut, b_{l+1} = b_l +
// exp(log_gaps[l-1]), which keeps them strictly increasing for any finite
// parameter values. sigma of the ordinal likelihood is fixed to 1 and not a
// parameter.
struct ModelParams {
    Eigen::VectorXd beta;        // d
    double first_cut = 0.0;      // b_1
    Eigen::VectorXd log_gaps;    // L-2 entries
    Eigen::MatrixXd transition;  // L x L, transition(from-1, to-1)
    double card_weight = 0.0;    // w

    int num_levels() const { return static_cast<int>(log_gaps.size()) + 2; }
    int feature_dim() const { return static_cast<int>(beta.size()); }
};

// Returns [-inf, b_1, ..., b_{L-1}, +inf] (size L+1), strictly increasing in
// the interior by construction.
std::vector<double> decode_cutpoints(const ModelParams& params);

// Inverse of decode_cutpoints for the interior cuts; interior must be
// strictly increasing with size L-1.
void encode_cutpoints(const std::vector<double>& interior, double& first_cut,
                      Eigen::VectorXd& log_gaps);

struct ValidationIssue {
    std::string bag_id;
    std::string what;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

ValidationReport validate_dataset(const Dataset& ds);

// Thrown by entry points that reject invalid datasets.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an objective or recursion produces a non-finite value that the
// model contract rules out.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Copy of the dataset with every bag's instance labels removed. Training
// paths only ever see this view, so weak supervision cannot leak.
Dataset training_view(const Dataset& ds);

// Throws DataError with the report summary if the dataset is invalid.
void require_valid(const Dataset& ds);

}  // namespace midorf
