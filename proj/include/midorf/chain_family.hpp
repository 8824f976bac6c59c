#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "midorf/inference.hpp"
#include "midorf/model.hpp"
#include "midorf/parallel.hpp"

namespace midorf {

// The four latent-chain models share one training engine and differ along two
// axes: the node potential family, and whether the label enters through the
// multi-instance (augmented-chain) construction or an additive per-step
// compatibility table.
enum class NodeModel { OrdinalProbit, Multinomial };

struct ChainSpec {
    NodeModel node_model = NodeModel::OrdinalProbit;
    bool multi_instance = true;  // augmented 2L lattice with cardinality weight
    bool label_compat = false;   // additive Gamma[level, label] per step
    int num_levels = 2;
    int feature_dim = 1;

    int node_dim() const {
        return node_model == NodeModel::OrdinalProbit ? feature_dim + num_levels - 1
                                                      : num_levels * feature_dim;
    }
    int trans_offset() const { return node_dim(); }
    int compat_offset() const { return trans_offset() + num_levels * num_levels; }
    int dim() const {
        int n = node_dim() + num_levels * num_levels;
        if (label_compat) n += num_levels * num_levels;
        if (multi_instance) n += 1;
        return n;
    }
};

// Unpacked parameter blocks. Only the blocks the spec selects are meaningful.
struct ChainParamsView {
    Eigen::VectorXd beta;        // ordinal node projection
    double first_cut = 0.0;      // ordinal interior cuts (log-gap encoding)
    Eigen::VectorXd log_gaps;
    Eigen::MatrixXd node_weights;  // multinomial L x d
    Eigen::MatrixXd transition;    // L x L
    Eigen::MatrixXd label_compat;  // L x L, (level-1, label-1)
    double card_weight = 0.0;
};

ChainParamsView unpack_chain(const ChainSpec& spec, const Eigen::VectorXd& theta);
Eigen::VectorXd pack_chain(const ChainSpec& spec, const ChainParamsView& view);

// Seeded initialization: small-noise node weights, equal-mass interior cuts
// for the ordinal family, zero transitions/compatibility/cardinality weight.
Eigen::VectorXd init_chain(const ChainSpec& spec, std::uint64_t seed);

// Regularized negative log-likelihood over the dataset. The regularizer is
// alpha * (||node weights||^2 + ||W||_F^2 [+ ||Gamma||_F^2]); cut positions
// and the cardinality weight are unregularized.
double chain_nll(const ChainSpec& spec, const Eigen::VectorXd& theta, const Dataset& ds,
                 double alpha, Exec exec = Exec::Parallel);

// Same value, also writing the exact gradient (expectation identity over the
// per-label marginals) into grad.
double chain_nll_grad(const ChainSpec& spec, const Eigen::VectorXd& theta, const Dataset& ds,
                      double alpha, Eigen::VectorXd& grad, Exec exec = Exec::Parallel);

// Per-label log-partitions for one bag.
Eigen::VectorXd chain_log_partitions(const ChainSpec& spec, const ChainParamsView& view,
                                     const Bag& bag);

struct ChainPrediction {
    Level bag_label = 1;
    std::vector<Level> instance_labels;
    Eigen::VectorXd posterior;  // L
};

// Bag label by posterior argmax (ties toward the lower level); instance
// labels by node-marginal argmax conditioned on the predicted bag label.
ChainPrediction chain_predict(const ChainSpec& spec, const ChainParamsView& view, const Bag& bag);

// Node marginals given a label (flag summed out for multi-instance chains).
Eigen::MatrixXd chain_node_marginals(const ChainSpec& spec, const ChainParamsView& view,
                                     const Bag& bag, Level y);

}  // namespace midorf
