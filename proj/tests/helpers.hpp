#pragma once

#include <random>

#include "midorf/model.hpp"

namespace midorf::testing {

// Small random problems for property tests and oracle comparisons.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine);
    }
    double normal(double sigma = 1.0) {
        return std::normal_distribution<double>(0.0, sigma)(engine);
    }
    int uniform_int(int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(engine);
    }
};

inline ModelParams random_params(Rng& rng, int d, int L, double scale = 1.0) {
    ModelParams p;
    p.beta.resize(d);
    for (int i = 0; i < d; ++i) p.beta[i] = scale * rng.normal();
    p.first_cut = rng.uniform(-1.5, 0.0);
    p.log_gaps.resize(L - 2);
    for (int i = 0; i < L - 2; ++i) p.log_gaps[i] = rng.uniform(-1.0, 0.5);
    p.transition.resize(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) p.transition(i, j) = scale * rng.normal(0.5);
    p.card_weight = rng.uniform(-1.0, 1.0);
    return p;
}

inline Bag random_bag(Rng& rng, int T, int d, int L, bool with_instance_labels = false) {
    Bag bag;
    bag.id = "bag" + std::to_string(rng.uniform_int(0, 1 << 20));
    bag.instances.resize(T, d);
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < d; ++j) bag.instances(t, j) = rng.normal();
    std::vector<Level> states(static_cast<size_t>(T));
    for (int t = 0; t < T; ++t) states[static_cast<size_t>(t)] = rng.uniform_int(1, L);
    bag.bag_label = *std::max_element(states.begin(), states.end());
    if (with_instance_labels) bag.instance_labels = states;
    return bag;
}

inline Dataset random_dataset(Rng& rng, int n_bags, int max_T, int d, int L,
                              bool with_instance_labels = false) {
    Dataset ds;
    ds.scale.num_levels = L;
    ds.feature_dim = d;
    for (int i = 0; i < n_bags; ++i) {
        Bag bag = random_bag(rng, rng.uniform_int(1, max_T), d, L, with_instance_labels);
        bag.id = "bag" + std::to_string(i);
        ds.bags.push_back(std::move(bag));
    }
    return ds;
}

}  // namespace midorf::testing
