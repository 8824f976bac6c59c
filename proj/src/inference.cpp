#include "midorf/inference.hpp"

#include <cassert>
#include <cmath>

#include "midorf/potentials.hpp"

namespace midorf {

namespace {

int argmax_low_tie(const Eigen::Ref<const Eigen::VectorXd>& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

double log_partition_given_label(const ModelParams& params, const Bag& bag, Level y) {
    assert(y >= 1 && y <= params.num_levels());
    const Eigen::MatrixXd nodes = node_potential_table(params, bag.instances);
    const ChainLattice lat = build_augmented_lattice(nodes, params.transition,
                                                     params.card_weight, y);
    return log_partition(lat);
}

Eigen::VectorXd label_posterior(const ModelParams& params, const Bag& bag) {
    const int L = params.num_levels();
    const Eigen::MatrixXd nodes = node_potential_table(params, bag.instances);
    Eigen::VectorXd log_z(L);
    for (int y = 1; y <= L; ++y) {
        const ChainLattice lat = build_augmented_lattice(nodes, params.transition,
                                                         params.card_weight, y);
        log_z[y - 1] = log_partition(lat);
    }
    double m = kImpossible;
    for (int i = 0; i < L; ++i)
        if (!is_impossible(log_z[i]) && log_z[i] > m) m = log_z[i];
    Eigen::VectorXd post = Eigen::VectorXd::Zero(L);
    if (is_impossible(m)) return post;
    for (int i = 0; i < L; ++i)
        if (!is_impossible(log_z[i])) post[i] = std::exp(log_z[i] - m);
    post /= post.sum();
    return post;
}

Marginals marginals_given_label(const ModelParams& params, const Bag& bag, Level y) {
    const int L = params.num_levels();
    const Eigen::MatrixXd nodes = node_potential_table(params, bag.instances);
    const ChainLattice lat = build_augmented_lattice(nodes, params.transition,
                                                     params.card_weight, y);
    const ChainPosteriors post = forward_backward(lat);
    Marginals m;
    m.node = fold_aug_nodes(post.node, L);
    for (const Eigen::MatrixXd& slice : pairwise_marginals(lat))
        m.pair.push_back(fold_aug_pairs(slice, L));
    return m;
}

Level predict_bag_label(const ModelParams& params, const Bag& bag) {
    const Eigen::VectorXd post = label_posterior(params, bag);
    return argmax_low_tie(post) + 1;
}

std::vector<Level> predict_instance_labels(const ModelParams& params, const Bag& bag,
                                           const PredictOptions& options) {
    const int L = params.num_levels();
    const int T = bag.length();
    Eigen::MatrixXd node_marginals;
    if (options.mix_posterior_over_labels) {
        const Eigen::VectorXd post = label_posterior(params, bag);
        const Eigen::MatrixXd nodes = node_potential_table(params, bag.instances);
        node_marginals = Eigen::MatrixXd::Zero(T, L);
        for (int y = 1; y <= L; ++y) {
            if (post[y - 1] <= 0.0) continue;
            const ChainLattice lat = build_augmented_lattice(nodes, params.transition,
                                                             params.card_weight, y);
            node_marginals += post[y - 1] * fold_aug_nodes(forward_backward(lat).node, L);
        }
    } else {
        const Level y_hat = predict_bag_label(params, bag);
        node_marginals = marginals_given_label(params, bag, y_hat).node;
    }
    std::vector<Level> labels(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t)
        labels[static_cast<size_t>(t)] = argmax_low_tie(node_marginals.row(t).transpose()) + 1;
    return labels;
}

}  // namespace midorf
