#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "midorf/model.hpp"
#include "midorf/parallel.hpp"

namespace midorf {

struct TrainConfig {
    double alpha = 1.0;                // ridge weight on beta and W
    int max_iterations = 500;
    double gradient_tolerance = 1e-5;
    std::uint64_t seed = 0;
    std::vector<double> alpha_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
    int restarts = 1;                  // extra optimizer runs from fresh seeds
    Exec exec = Exec::Parallel;
};

struct TrainTrace {
    std::vector<double> objective;  // value at each accepted iterate
    std::vector<double> grad_norm;
    double wall_seconds = 0.0;
    int iterations = 0;
    bool converged = false;  // gradient tolerance reached before the budget
};

// Packed free-parameter order: [beta, first_cut, log_gaps, W row-major, w].
Eigen::VectorXd pack_params(const ModelParams& params);
ModelParams unpack_params(const Eigen::VectorXd& theta, int feature_dim, int num_levels);

// -sum_n log P(y_n | X_n) + alpha (||beta||^2 + ||W||_F^2).
double negative_log_likelihood(const ModelParams& params, const Dataset& ds, double alpha,
                               Exec exec = Exec::Parallel);

// Exact gradient of the objective in packed order, from the conditional and
// label-mixed marginals.
Eigen::VectorXd gradient(const ModelParams& params, const Dataset& ds, double alpha,
                         Exec exec = Exec::Parallel);

// Seeded initialization: beta ~ N(0, 0.01^2), interior cuts at equal-mass
// standard-normal quantiles, W = 0, w = 0.
ModelParams initial_params(int feature_dim, int num_levels, std::uint64_t seed);

// L-BFGS training. Instance labels are stripped before anything touches the
// data. Returns the best restart by final objective.
std::pair<ModelParams, TrainTrace> fit(const Dataset& ds, const TrainConfig& config);

struct AlphaSelection {
    double alpha = 0.0;
    ModelParams params;
    TrainTrace trace;
    std::vector<double> validation_icc;  // one entry per grid value (NaN = undefined)
};

// Fits once per grid value and keeps the alpha with the best validation
// sequence-level ICC (ties go to the larger alpha).
AlphaSelection select_alpha(const Dataset& train, const Dataset& validation,
                            const TrainConfig& config);

}  // namespace midorf
