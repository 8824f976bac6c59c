#include "midorf/potentials.hpp"

#include <algorithm>
#include <cassert>

namespace midorf {

double node_potential(const ModelParams& params, const Eigen::VectorXd& x, Level level) {
    assert(level >= 1 && level <= params.num_levels());
    const std::vector<double> cuts = decode_cutpoints(params);
    const double z = params.beta.dot(x);
    return log_interval_prob(cuts[static_cast<size_t>(level) - 1],
                             cuts[static_cast<size_t>(level)], z);
}

double edge_potential(const ModelParams& params, Level from, Level to) {
    return params.transition(from - 1, to - 1);
}

double cardinality_potential(const ModelParams& params, const LatentAssignment& h, Level y) {
    Level max_level = 0;
    int matches = 0;
    for (Level state : h.states) {
        max_level = std::max(max_level, state);
        if (state == y) ++matches;
    }
    if (max_level != y) return kImpossible;
    return params.card_weight * matches;
}

double total_energy(const ModelParams& params, const Bag& bag, const LatentAssignment& h,
                    Level y) {
    assert(static_cast<int>(h.states.size()) == bag.length());
    const double card = cardinality_potential(params, h, y);
    if (is_impossible(card)) return kImpossible;
    double energy = card;
    const std::vector<double> cuts = decode_cutpoints(params);
    for (int t = 0; t < bag.length(); ++t) {
        const Level l = h.states[static_cast<size_t>(t)];
        const double z = params.beta.dot(bag.instances.row(t));
        energy += log_interval_prob(cuts[static_cast<size_t>(l) - 1],
                                    cuts[static_cast<size_t>(l)], z);
        if (t + 1 < bag.length())
            energy += edge_potential(params, l, h.states[static_cast<size_t>(t) + 1]);
    }
    return energy;
}

double augmented_node(const ModelParams& params, const Eigen::VectorXd& x, AugmentedState state,
                      int t, int T, Level y) {
    assert(t >= 1 && t <= T);
    const Level l = state.level;
    if (l > y) return kImpossible;
    if (t == 1) {
        // zeta_1 = 0 requires l < y; zeta_1 = 1 requires l = y
        if (state.flag == 0 ? l >= y : l != y) return kImpossible;
    }
    if (t == T && state.flag != 1) return kImpossible;
    const double bonus = (l == y) ? params.card_weight : 0.0;
    return node_potential(params, x, l) + bonus;
}

double augmented_edge(const ModelParams& params, AugmentedState from, AugmentedState to,
                      Level y) {
    if (from.flag == 1 && to.flag == 0) return kImpossible;
    if (from.flag == 0) {
        if (to.flag == 0 && to.level == y) return kImpossible;
        if (to.flag == 1 && to.level != y) return kImpossible;
    }
    return edge_potential(params, from.level, to.level);
}

Eigen::MatrixXd node_potential_table(const ModelParams& params,
                                     const Eigen::MatrixXd& instances) {
    const int T = static_cast<int>(instances.rows());
    const int L = params.num_levels();
    const std::vector<double> cuts = decode_cutpoints(params);
    const Eigen::VectorXd z = instances * params.beta;
    Eigen::MatrixXd table(T, L);
    for (int t = 0; t < T; ++t)
        for (int l = 0; l < L; ++l)
            table(t, l) = log_interval_prob(cuts[static_cast<size_t>(l)],
                                            cuts[static_cast<size_t>(l) + 1], z[t]);
    return table;
}

}  // namespace midorf
