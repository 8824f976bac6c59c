#include <doctest.h>

#include <chrono>
#include <cmath>

#include "helpers.hpp"
#include "midorf/inference.hpp"
#include "midorf/oracle.hpp"
#include "midorf/potentials.hpp"

using namespace midorf;

TEST_CASE("T=1 partition is the forced-path score") {
    testing::Rng rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const int L = rng.uniform_int(2, 5);
        ModelParams p = testing::random_params(rng, 3, L);
        Bag bag = testing::random_bag(rng, 1, 3, L);
        for (Level y = 1; y <= L; ++y) {
            const double expected =
                node_potential(p, bag.instances.row(0).transpose(), y) + p.card_weight;
            CHECK(log_partition_given_label(p, bag, y) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward-backward agrees with brute-force enumeration") {
    testing::Rng rng(53);
    for (int trial = 0; trial < 40; ++trial) {
        const int L = rng.uniform_int(2, 3);
        const int T = rng.uniform_int(1, 8);
        const int d = rng.uniform_int(1, 4);
        ModelParams p = testing::random_params(rng, d, L);
        Bag bag = testing::random_bag(rng, T, d, L);

        for (Level y = 1; y <= L; ++y) {
            const OracleResult oracle = oracle_enumerate(p, bag, y);
            CHECK(log_partition_given_label(p, bag, y) ==
                  doctest::Approx(oracle.log_partition).epsilon(1e-10));
            const Marginals dp = marginals_given_label(p, bag, y);
            CHECK((dp.node - oracle.marginals.node).cwiseAbs().maxCoeff() < 1e-10);
            for (size_t t = 0; t < dp.pair.size(); ++t)
                CHECK((dp.pair[t] - oracle.marginals.pair[t]).cwiseAbs().maxCoeff() < 1e-10);
        }
        const Eigen::VectorXd post = label_posterior(p, bag);
        const Eigen::VectorXd oracle_post = oracle_label_posterior(p, bag);
        CHECK((post - oracle_post).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(post.sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("oracle always counts the constant path") {
    testing::Rng rng(59);
    const int L = 3;
    ModelParams p = testing::random_params(rng, 2, L);
    Bag bag = testing::random_bag(rng, 4, 2, L);
    for (Level y = 1; y <= L; ++y) {
        // h == y satisfies the max filter, so the partition is never impossible
        CHECK(!is_impossible(oracle_enumerate(p, bag, y).log_partition));
    }
    Bag big = testing::random_bag(rng, 40, 2, L);
    CHECK_THROWS(oracle_enumerate(p, big, 1));
}

TEST_CASE("with zero card weight and transitions the partition factorizes") {
    testing::Rng rng(61);
    const int L = 3, T = 5;
    ModelParams p = testing::random_params(rng, 2, L);
    p.transition.setZero();
    p.card_weight = 0.0;
    Bag bag = testing::random_bag(rng, T, 2, L);

    // independent-chain sum over h with max(h) = y via inclusion-exclusion:
    // sum_{max <= y} - sum_{max <= y-1} of prod_t p(h_t | x_t)
    for (Level y = 1; y <= L; ++y) {
        auto prefix = [&](Level cap) {
            double total_log = 0.0;
            for (int t = 0; t < T; ++t) {
                double s = 0.0;
                for (Level l = 1; l <= cap; ++l)
                    s += std::exp(node_potential(p, bag.instances.row(t).transpose(), l));
                total_log += std::log(s);
            }
            return total_log;
        };
        const double below = y >= 2 ? std::exp(prefix(y - 1)) : 0.0;
        const double expected = std::exp(prefix(y)) - below;
        CHECK(std::exp(log_partition_given_label(p, bag, y)) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("marginals respect the label support and normalization") {
    testing::Rng rng(67);
    const int L = 4, T = 6;
    ModelParams p = testing::random_params(rng, 3, L);
    Bag bag = testing::random_bag(rng, T, 3, L);
    for (Level y = 1; y <= L; ++y) {
        const Marginals m = marginals_given_label(p, bag, y);
        for (int t = 0; t < T; ++t) {
            CHECK(m.node.row(t).sum() == doctest::Approx(1.0).epsilon(1e-8));
            for (Level l = y + 1; l <= L; ++l) CHECK(m.node(t, l - 1) == 0.0);
        }
        for (const auto& slice : m.pair) CHECK(slice.sum() == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("label posterior is invariant to a constant node shift") {
    // shifting every node potential by c multiplies every per-label partition
    // by exp(T c), which cancels in the softmax
    testing::Rng rng(71);
    const int L = 3, T = 5;
    ModelParams p = testing::random_params(rng, 2, L);
    Bag bag = testing::random_bag(rng, T, 2, L);
    const Eigen::MatrixXd nodes = node_potential_table(p, bag.instances);

    Eigen::VectorXd z0(L), z1(L);
    const double c = 1.37;
    const Eigen::MatrixXd shifted_nodes = nodes.array() + c;
    for (Level y = 1; y <= L; ++y) {
        ChainLattice lat = build_augmented_lattice(nodes, p.transition, p.card_weight, y);
        z0[y - 1] = log_partition(lat);
        ChainLattice shifted =
            build_augmented_lattice(shifted_nodes, p.transition, p.card_weight, y);
        z1[y - 1] = log_partition(shifted);
        CHECK(z1[y - 1] == doctest::Approx(z0[y - 1] + T * c).epsilon(1e-10));
    }
    const Eigen::VectorXd post0 = (z0.array() - z0.maxCoeff()).exp();
    const Eigen::VectorXd post1 = (z1.array() - z1.maxCoeff()).exp();
    CHECK((post0 / post0.sum() - post1 / post1.sum()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("raising the cardinality weight favours labels with many matches") {
    testing::Rng rng(73);
    const int L = 3, T = 4, d = 2;
    ModelParams p = testing::random_params(rng, d, L);
    p.card_weight = 0.0;
    Bag bag = testing::random_bag(rng, T, d, L);

    const Eigen::VectorXd post0 = label_posterior(p, bag);
    CHECK((post0 - oracle_label_posterior(p, bag)).cwiseAbs().maxCoeff() < 1e-10);

    // label whose conditional expected match count is largest
    int best = 0;
    double best_matches = -1.0;
    for (Level y = 1; y <= L; ++y) {
        const double matches = oracle_expected_matches(p, bag, y);
        if (matches > best_matches) {
            best_matches = matches;
            best = y - 1;
        }
    }
    ModelParams q = p;
    q.card_weight = 0.5;
    const Eigen::VectorXd post1 = label_posterior(q, bag);
    CHECK((post1 - oracle_label_posterior(q, bag)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(post1[best] > post0[best]);
}

TEST_CASE("bag prediction ties break toward the lower level") {
    // symmetric two-level construction: T=1, projection 0, cut 0 makes both
    // labels exactly equally likely
    ModelParams p;
    p.beta = Eigen::VectorXd::Zero(2);
    p.first_cut = 0.0;
    p.log_gaps.resize(0);
    p.transition = Eigen::MatrixXd::Zero(2, 2);
    p.card_weight = 0.3;
    Bag bag;
    bag.id = "tie";
    bag.instances = Eigen::MatrixXd::Zero(1, 2);
    bag.bag_label = 1;
    const Eigen::VectorXd post = label_posterior(p, bag);
    CHECK(post[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(predict_bag_label(p, bag) == 1);
}

TEST_CASE("instance predictions stay at or below the predicted bag label") {
    testing::Rng rng(79);
    for (int trial = 0; trial < 25; ++trial) {
        const int L = rng.uniform_int(2, 4);
        const int T = rng.uniform_int(1, 7);
        ModelParams p = testing::random_params(rng, 2, L);
        Bag bag = testing::random_bag(rng, T, 2, L);
        const Level y_hat = predict_bag_label(p, bag);
        const std::vector<Level> inst = predict_instance_labels(p, bag);
        REQUIRE(static_cast<int>(inst.size()) == T);
        for (Level l : inst) CHECK(l <= y_hat);
        if (T == 1) CHECK(inst[0] == y_hat);
    }
}

TEST_CASE("T=1 instance prediction is the predicted bag label") {
    testing::Rng rng(83);
    ModelParams p = testing::random_params(rng, 2, 3);
    Bag bag = testing::random_bag(rng, 1, 2, 3);
    const Level y_hat = predict_bag_label(p, bag);
    CHECK(predict_instance_labels(p, bag) == std::vector<Level>{y_hat});
}

TEST_CASE("extreme node score at one level dominates a T=1 posterior") {
    ModelParams p;
    p.beta.resize(1);
    p.beta << 5.0;
    p.first_cut = -2.0;
    p.log_gaps.resize(1);
    p.log_gaps << std::log(4.0);  // cuts at -2 and 2
    p.transition = Eigen::MatrixXd::Zero(3, 3);
    p.card_weight = 0.0;
    Bag bag;
    bag.id = "high";
    bag.instances.resize(1, 1);
    bag.instances << 2.0;  // projection 10, far above the top cut
    bag.bag_label = 3;
    CHECK(predict_bag_label(p, bag) == 3);
}

TEST_CASE("marginal-argmax predictions attain the bag label when the MAP path does") {
    testing::Rng rng(89);
    for (int trial = 0; trial < 20; ++trial) {
        const int L = 3, T = 5, d = 2;
        ModelParams p = testing::random_params(rng, d, L);
        Bag bag = testing::random_bag(rng, T, d, L);
        const Level y_hat = predict_bag_label(p, bag);
        const std::vector<Level> inst = predict_instance_labels(p, bag);
        const std::vector<Level> map = oracle_map_assignment(p, bag, y_hat);
        const bool map_attains =
            std::find(map.begin(), map.end(), y_hat) != map.end();
        const bool pred_attains =
            std::find(inst.begin(), inst.end(), y_hat) != inst.end();
        if (map_attains) CHECK(pred_attains);
    }
}

TEST_CASE("posterior-mixed instance prediction is available behind the option") {
    testing::Rng rng(97);
    ModelParams p = testing::random_params(rng, 2, 3);
    Bag bag = testing::random_bag(rng, 5, 2, 3);
    PredictOptions mixed;
    mixed.mix_posterior_over_labels = true;
    const std::vector<Level> a = predict_instance_labels(p, bag);
    const std::vector<Level> b = predict_instance_labels(p, bag, mixed);
    CHECK(a.size() == b.size());  // both defined; values may differ
}

TEST_CASE("runtime grows roughly linearly in T") {
    testing::Rng rng(101);
    const int L = 6;
    ModelParams p = testing::random_params(rng, 4, L);
    Bag short_bag = testing::random_bag(rng, 600, 4, L);
    Bag long_bag = testing::random_bag(rng, 1200, 4, L);

    auto time_once = [&](const Bag& bag) {
        const auto start = std::chrono::steady_clock::now();
        volatile double z = log_partition_given_label(p, bag, L);
        (void)z;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    std::vector<double> ratios;
    for (int rep = 0; rep < 20; ++rep) ratios.push_back(time_once(long_bag) / time_once(short_bag));
    std::nth_element(ratios.begin(), ratios.begin() + 10, ratios.end());
    CHECK(ratios[10] < 2.5);
}
