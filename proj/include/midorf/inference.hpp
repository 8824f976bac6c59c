#pragma once

#include <Eigen/Core>
#include <vector>

#include "midorf/lattice.hpp"
#include "midorf/model.hpp"

namespace midorf {

// Exact conditional posteriors of the latent ordinal states.
struct Marginals {
    Eigen::MatrixXd node;             // T x L, node(t, l-1) = p(h_t = l | X, y)
    std::vector<Eigen::MatrixXd> pair;  // T-1 slices, L x L, p(h_t, h_{t+1} | X, y)
};

struct PredictOptions {
    // When set, instance predictions use label-posterior-mixed node marginals
    // instead of conditioning on the MAP bag label. Off by default.
    bool mix_posterior_over_labels = false;
};

// log sum over (h, zeta) of exp(augmented energy) for the given label;
// kImpossible when no admissible path exists (cannot happen for 1 <= y <= L
// with finite potentials). Cost O(T * (2L)^2).
double log_partition_given_label(const ModelParams& params, const Bag& bag, Level y);

// P(y | X): softmax over labels of the per-label log-partitions. Sums to 1.
Eigen::VectorXd label_posterior(const ModelParams& params, const Bag& bag);

// Conditional node and pairwise marginals of h given (X, y), with the
// auxiliary flag summed out.
Marginals marginals_given_label(const ModelParams& params, const Bag& bag, Level y);

// argmax_y P(y | X); ties break toward the lower level.
Level predict_bag_label(const ModelParams& params, const Bag& bag);

// Per-instance levels: argmax_l p(h_t = l | X, y*) with y* the predicted bag
// label (ties toward the lower level). Never exceeds y*.
std::vector<Level> predict_instance_labels(const ModelParams& params, const Bag& bag,
                                           const PredictOptions& options = {});

}  // namespace midorf
