#include "midorf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "midorf/potentials.hpp"

namespace midorf {

namespace {

void check_guard(int L, int T) {
    double combos = std::pow(static_cast<double>(L), T);
    if (combos > 1e6)
        throw std::invalid_argument("oracle_enumerate: L^T exceeds the 1e6 guard");
}

// Calls fn(h) for every assignment h in {1..L}^T.
template <typename Fn>
void for_each_assignment(int L, int T, Fn&& fn) {
    LatentAssignment h;
    h.states.assign(static_cast<size_t>(T), 1);
    for (;;) {
        fn(h);
        int t = 0;
        while (t < T && h.states[static_cast<size_t>(t)] == L) {
            h.states[static_cast<size_t>(t)] = 1;
            ++t;
        }
        if (t == T) break;
        ++h.states[static_cast<size_t>(t)];
    }
}

}  // namespace

OracleResult oracle_enumerate(const ModelParams& params, const Bag& bag, Level y) {
    const int L = params.num_levels();
    const int T = bag.length();
    check_guard(L, T);

    double max_energy = kImpossible;
    for_each_assignment(L, T, [&](const LatentAssignment& h) {
        double e = total_energy(params, bag, h, y);
        if (!is_impossible(e) && e > max_energy) max_energy = e;
    });

    OracleResult out;
    out.marginals.node = Eigen::MatrixXd::Zero(T, L);
    out.marginals.pair.assign(static_cast<size_t>(std::max(T - 1, 0)),
                              Eigen::MatrixXd::Zero(L, L));
    if (is_impossible(max_energy)) {
        out.log_partition = kImpossible;
        return out;
    }

    double total = 0.0;
    for_each_assignment(L, T, [&](const LatentAssignment& h) {
        double e = total_energy(params, bag, h, y);
        if (is_impossible(e)) return;
        double weight = std::exp(e - max_energy);
        total += weight;
        for (int t = 0; t < T; ++t) {
            out.marginals.node(t, h.states[static_cast<size_t>(t)] - 1) += weight;
            if (t + 1 < T)
                out.marginals.pair[static_cast<size_t>(t)](
                    h.states[static_cast<size_t>(t)] - 1,
                    h.states[static_cast<size_t>(t) + 1] - 1) += weight;
        }
    });
    out.log_partition = max_energy + std::log(total);
    out.marginals.node /= total;
    for (auto& slice : out.marginals.pair) slice /= total;
    return out;
}

Eigen::VectorXd oracle_label_posterior(const ModelParams& params, const Bag& bag) {
    const int L = params.num_levels();
    Eigen::VectorXd log_z(L);
    for (int y = 1; y <= L; ++y) log_z[y - 1] = oracle_enumerate(params, bag, y).log_partition;
    double m = log_z.maxCoeff();
    Eigen::VectorXd post = (log_z.array() - m).exp();
    post /= post.sum();
    return post;
}

std::vector<Level> oracle_map_assignment(const ModelParams& params, const Bag& bag, Level y) {
    const int L = params.num_levels();
    const int T = bag.length();
    check_guard(L, T);
    double best = kImpossible;
    std::vector<Level> best_h;
    for_each_assignment(L, T, [&](const LatentAssignment& h) {
        double e = total_energy(params, bag, h, y);
        if (!is_impossible(e) && e > best) {
            best = e;
            best_h = h.states;
        }
    });
    return best_h;
}

double oracle_expected_matches(const ModelParams& params, const Bag& bag, Level y) {
    const OracleResult res = oracle_enumerate(params, bag, y);
    return res.marginals.node.col(y - 1).sum();
}

}  // namespace midorf
