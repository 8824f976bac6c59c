#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "midorf/model.hpp"

namespace midorf {

struct SynthConfig {
    int num_datasets = 10;
    int n_train = 100;
    int n_test = 150;
    int n_val = 50;
    int min_length = 50;
    int max_length = 75;
    int feature_dim = 10;
    int num_levels = 6;
    double noise_sigma = 0.25;
    int pool_size = 1000;
    std::uint64_t seed = 0;
};

// Parameters the sequences were generated from; kept for diagnostics and the
// manifest, never visible to training.
struct GeneratorTruth {
    Eigen::MatrixXd transition;     // row-stochastic L x L
    Eigen::VectorXd beta;           // projection of the generating regressor
    std::vector<double> cutpoints;  // interior cuts (L-1)
};

struct SynthDataset {
    int index = 0;
    Dataset train, test, val;
    GeneratorTruth truth;
};

// Bags follow a latent Markov chain of ordinal states; observations are pool
// feature vectors matched to the state through the generating ordinal
// regressor, plus i.i.d. Gaussian noise. Every bag label equals the maximum
// latent state. Deterministic given (config.seed, dataset_index) alone.
SynthDataset generate_dataset(const SynthConfig& config, int dataset_index);

std::vector<SynthDataset> generate_suite(const SynthConfig& config);

}  // namespace midorf
