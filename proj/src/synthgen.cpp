#include "midorf/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "midorf/numerics.hpp"

namespace midorf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Random sticky banded rows: a chain that holds its level most steps and
// moves mostly to neighbours, so sequence maxima spread over the whole scale
// instead of collapsing to L.
Eigen::MatrixXd sample_transition(std::mt19937_64& rng, int L) {
    std::uniform_real_distribution<double> stay_dist(0.85, 0.97);
    Eigen::MatrixXd P(L, L);
    for (int l = 0; l < L; ++l) {
        const double stay = stay_dist(rng);
        Eigen::VectorXd off = Eigen::VectorXd::Zero(L);
        double total = 0.0;
        for (int j = 0; j < L; ++j) {
            if (j == l) continue;
            const double conc = 4.0 * std::exp(-std::abs(j - l)) + 0.2;
            std::gamma_distribution<double> gamma(conc, 1.0);
            off[j] = gamma(rng);
            total += off[j];
        }
        for (int j = 0; j < L; ++j)
            P(l, j) = (j == l) ? stay : (1.0 - stay) * off[j] / total;
    }
    return P;
}

// Empirical quantile with linear interpolation (q in (0,1), values sorted).
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct Generator {
    Eigen::MatrixXd transition;
    Eigen::VectorXd beta;
    std::vector<double> interior_cuts;       // L-1
    Eigen::MatrixXd pool;                    // pool_size x d
    std::vector<std::vector<int>> level_pool;         // pool indices per level
    std::vector<std::vector<double>> level_cdf;       // per-level cumulative weights
};

Generator sample_generator(std::mt19937_64& rng, const SynthConfig& cfg) {
    const int L = cfg.num_levels, d = cfg.feature_dim;
    Generator gen;
    gen.transition = sample_transition(rng, L);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (int attempt = 0; attempt < 10; ++attempt) {
        gen.beta.resize(d);
        for (int i = 0; i < d; ++i) gen.beta[i] = normal(rng);
        gen.pool.resize(cfg.pool_size, d);
        for (int i = 0; i < cfg.pool_size; ++i)
            for (int j = 0; j < d; ++j) gen.pool(i, j) = normal(rng);
        const Eigen::VectorXd z = gen.pool * gen.beta;

        // interior cuts at equal-mass quantiles of the pool projections
        std::vector<double> sorted(z.data(), z.data() + z.size());
        std::sort(sorted.begin(), sorted.end());
        gen.interior_cuts.resize(static_cast<size_t>(L) - 1);
        for (int k = 1; k <= L - 1; ++k)
            gen.interior_cuts[static_cast<size_t>(k) - 1] =
                quantile_sorted(sorted, static_cast<double>(k) / L);

        std::vector<double> cuts(static_cast<size_t>(L) + 1);
        cuts.front() = -std::numeric_limits<double>::infinity();
        cuts.back() = std::numeric_limits<double>::infinity();
        std::copy(gen.interior_cuts.begin(), gen.interior_cuts.end(), cuts.begin() + 1);

        // assign each pool vector its most probable level, then keep the
        // in-level selection weights proportional to p(level | x)
        gen.level_pool.assign(static_cast<size_t>(L), {});
        gen.level_cdf.assign(static_cast<size_t>(L), {});
        for (int i = 0; i < cfg.pool_size; ++i) {
            int best = 0;
            double best_p = 0.0;
            for (int l = 0; l < L; ++l) {
                const double p = interval_prob(cuts[static_cast<size_t>(l)],
                                               cuts[static_cast<size_t>(l) + 1], z[i]);
                if (p > best_p) {
                    best_p = p;
                    best = l;
                }
            }
            gen.level_pool[static_cast<size_t>(best)].push_back(i);
            auto& cdf = gen.level_cdf[static_cast<size_t>(best)];
            cdf.push_back((cdf.empty() ? 0.0 : cdf.back()) + best_p);
        }
        const bool all_covered =
            std::all_of(gen.level_cdf.begin(), gen.level_cdf.end(),
                        [](const std::vector<double>& cdf) {
                            return !cdf.empty() && cdf.back() > 0.0;
                        });
        if (all_covered) return gen;
    }
    throw NumericError("synthgen: could not cover every level after 10 attempts");
}

int draw_pool_index(std::mt19937_64& rng, const Generator& gen, int level) {
    const auto& cdf = gen.level_cdf[static_cast<size_t>(level)];
    const auto& idx = gen.level_pool[static_cast<size_t>(level)];
    std::uniform_real_distribution<double> unit(0.0, cdf.back());
    const double u = unit(rng);
    const size_t k = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    return idx[std::min(k, idx.size() - 1)];
}

Bag sample_bag(std::mt19937_64& rng, const Generator& gen, const SynthConfig& cfg,
               const std::string& id) {
    const int L = cfg.num_levels;
    std::uniform_int_distribution<int> length_dist(cfg.min_length, cfg.max_length);
    std::uniform_int_distribution<int> start_dist(0, L - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    const int T = length_dist(rng);
    std::vector<Level> states(static_cast<size_t>(T));
    int h = start_dist(rng);
    states[0] = h + 1;
    for (int t = 1; t < T; ++t) {
        const double u = unit(rng);
        double acc = 0.0;
        int next = L - 1;
        for (int j = 0; j < L; ++j) {
            acc += gen.transition(h, j);
            if (u <= acc) {
                next = j;
                break;
            }
        }
        h = next;
        states[static_cast<size_t>(t)] = h + 1;
    }

    Bag bag;
    bag.id = id;
    bag.instances.resize(T, cfg.feature_dim);
    for (int t = 0; t < T; ++t) {
        const int pick = draw_pool_index(rng, gen, states[static_cast<size_t>(t)] - 1);
        bag.instances.row(t) = gen.pool.row(pick);
        if (cfg.noise_sigma > 0.0)
            for (int j = 0; j < cfg.feature_dim; ++j)
                bag.instances(t, j) += cfg.noise_sigma * noise(rng);
    }
    bag.instance_labels = states;
    bag.bag_label = *std::max_element(states.begin(), states.end());
    return bag;
}

Dataset sample_split(std::mt19937_64& rng, const Generator& gen, const SynthConfig& cfg,
                     int dataset_index, const std::string& split, int count) {
    Dataset ds;
    ds.scale.num_levels = cfg.num_levels;
    ds.feature_dim = cfg.feature_dim;
    ds.bags.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k)
        ds.bags.push_back(sample_bag(rng, gen, cfg,
                                     "ds" + std::to_string(dataset_index) + "-" + split + "-" +
                                         std::to_string(k)));
    return ds;
}

}  // namespace

SynthDataset generate_dataset(const SynthConfig& config, int dataset_index) {
    if (config.num_levels < 2 || config.feature_dim < 1 || config.pool_size < config.num_levels ||
        config.min_length < 1 || config.max_length < config.min_length)
        throw DataError("generate_dataset: invalid configuration");

    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(
                                       dataset_index + 1))));
    const Generator gen = sample_generator(rng, config);

    SynthDataset out;
    out.index = dataset_index;
    out.truth.transition = gen.transition;
    out.truth.beta = gen.beta;
    out.truth.cutpoints = gen.interior_cuts;
    out.train = sample_split(rng, gen, config, dataset_index, "train", config.n_train);
    out.test = sample_split(rng, gen, config, dataset_index, "test", config.n_test);
    out.val = sample_split(rng, gen, config, dataset_index, "val", config.n_val);
    return out;
}

std::vector<SynthDataset> generate_suite(const SynthConfig& config) {
    std::vector<SynthDataset> suite;
    suite.reserve(static_cast<size_t>(config.num_datasets));
    for (int i = 0; i < config.num_datasets; ++i) suite.push_back(generate_dataset(config, i));
    return suite;
}

}  // namespace midorf
