#include "midorf/chain_family.hpp"

#include <cassert>
#include <cmath>
#include <exception>
#include <random>

#include "midorf/lattice.hpp"
#include "midorf/numerics.hpp"

namespace midorf {

namespace {

constexpr double kProbFloor = 1e-300;

std::vector<double> decode_cuts(const ChainParamsView& view, int L) {
    std::vector<double> cuts(static_cast<size_t>(L) + 1);
    cuts.front() = -std::numeric_limits<double>::infinity();
    cuts.back() = std::numeric_limits<double>::infinity();
    double b = view.first_cut;
    cuts[1] = b;
    for (int l = 0; l < L - 2; ++l) {
        b += std::exp(view.log_gaps[l]);
        cuts[static_cast<size_t>(l) + 2] = b;
    }
    return cuts;
}

// Ordinal node scores and the pieces of their derivatives. Where the interval
// probability hits the underflow clamp the score is constant, so all
// derivative entries are zero there.
struct OrdinalTables {
    Eigen::MatrixXd logp;  // T x L
    Eigen::MatrixXd dz;    // d logp / d z
    Eigen::MatrixXd du;    // d logp / d b_l      (upper cut of the level)
    Eigen::MatrixXd dl;    // d logp / d b_{l-1}  (lower cut of the level)
};

OrdinalTables ordinal_tables(const ChainParamsView& view, const Eigen::MatrixXd& X, int L,
                             bool with_grads) {
    const int T = static_cast<int>(X.rows());
    const std::vector<double> cuts = decode_cuts(view, L);
    const Eigen::VectorXd z = X * view.beta;
    OrdinalTables tab;
    tab.logp.resize(T, L);
    if (with_grads) {
        tab.dz = Eigen::MatrixXd::Zero(T, L);
        tab.du = Eigen::MatrixXd::Zero(T, L);
        tab.dl = Eigen::MatrixXd::Zero(T, L);
    }
    for (int t = 0; t < T; ++t)
        for (int l = 0; l < L; ++l) {
            const double lo = cuts[static_cast<size_t>(l)];
            const double hi = cuts[static_cast<size_t>(l) + 1];
            const double D = interval_prob(lo, hi, z[t]);
            tab.logp(t, l) = std::log(D);
            if (!with_grads || D <= kProbFloor) continue;
            const double pu = (l == L - 1) ? 0.0 : norm_pdf(hi - z[t]);
            const double pl = (l == 0) ? 0.0 : norm_pdf(lo - z[t]);
            tab.dz(t, l) = (pl - pu) / D;
            tab.du(t, l) = pu / D;
            tab.dl(t, l) = -pl / D;
        }
    return tab;
}

Eigen::MatrixXd multinomial_logp(const ChainParamsView& view, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd scores = X * view.node_weights.transpose();  // T x L
    for (Eigen::Index t = 0; t < scores.rows(); ++t) {
        const double m = scores.row(t).maxCoeff();
        const double lse = m + std::log((scores.row(t).array() - m).exp().sum());
        scores.row(t).array() -= lse;
    }
    return scores;
}

ChainLattice build_lattice(const ChainSpec& spec, const ChainParamsView& view,
                           const Eigen::MatrixXd& node_base, int y) {
    if (spec.multi_instance)
        return build_augmented_lattice(node_base, view.transition, view.card_weight, y);
    ChainLattice lat;
    lat.node = node_base;
    lat.node.rowwise() += view.label_compat.col(y - 1).transpose();
    lat.trans = view.transition;
    return lat;
}

Eigen::MatrixXd node_base_table(const ChainSpec& spec, const ChainParamsView& view,
                                const Eigen::MatrixXd& X) {
    if (spec.node_model == NodeModel::OrdinalProbit)
        return ordinal_tables(view, X, spec.num_levels, false).logp;
    return multinomial_logp(view, X);
}

Eigen::VectorXd softmax_from_logz(const Eigen::VectorXd& log_z) {
    const int L = static_cast<int>(log_z.size());
    double m = kImpossible;
    for (int i = 0; i < L; ++i)
        if (!is_impossible(log_z[i]) && log_z[i] > m) m = log_z[i];
    Eigen::VectorXd p = Eigen::VectorXd::Zero(L);
    if (is_impossible(m)) return p;
    for (int i = 0; i < L; ++i)
        if (!is_impossible(log_z[i])) p[i] = std::exp(log_z[i] - m);
    p /= p.sum();
    return p;
}

int argmax_low_tie(const Eigen::Ref<const Eigen::VectorXd>& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

// Per-bag negative log-likelihood term and its gradient in packed layout.
double bag_nll_grad(const ChainSpec& spec, const ChainParamsView& view, const Bag& bag,
                    Eigen::VectorXd* grad) {
    const int L = spec.num_levels;
    const int T = bag.length();
    const bool want_grad = grad != nullptr;

    OrdinalTables otab;
    Eigen::MatrixXd node_base;
    if (spec.node_model == NodeModel::OrdinalProbit) {
        otab = ordinal_tables(view, bag.instances, L, want_grad);
        node_base = otab.logp;
    } else {
        node_base = multinomial_logp(view, bag.instances);
    }

    Eigen::VectorXd log_z(L);
    std::vector<Eigen::MatrixXd> posts;   // folded node posteriors per label
    std::vector<Eigen::MatrixXd> pairs;   // folded pairwise sums per label
    posts.reserve(static_cast<size_t>(L));
    pairs.reserve(static_cast<size_t>(L));
    for (int y = 1; y <= L; ++y) {
        const ChainLattice lat = build_lattice(spec, view, node_base, y);
        if (want_grad) {
            const ChainPosteriors fb = forward_backward(lat);
            log_z[y - 1] = fb.log_partition;
            if (spec.multi_instance) {
                posts.push_back(fold_aug_nodes(fb.node, L));
                pairs.push_back(fold_aug_pairs(fb.pair_sum, L));
            } else {
                posts.push_back(fb.node);
                pairs.push_back(fb.pair_sum);
            }
        } else {
            log_z[y - 1] = log_partition(lat);
        }
    }

    const double lse = log_sum_exp(std::span<const double>(log_z.data(),
                                                           static_cast<size_t>(L)));
    const double log_zy = log_z[bag.bag_label - 1];
    if (is_impossible(log_zy) || !std::isfinite(lse))
        throw NumericError("chain model: impossible partition for bag " + bag.id);
    const double nll = -(log_zy - lse);
    if (!want_grad) return nll;

    const Eigen::VectorXd pi = softmax_from_logz(log_z);
    Eigen::VectorXd coef = -pi;
    coef[bag.bag_label - 1] += 1.0;

    Eigen::MatrixXd cpost = Eigen::MatrixXd::Zero(T, L);
    Eigen::MatrixXd cpair = Eigen::MatrixXd::Zero(L, L);
    for (int y = 0; y < L; ++y) {
        cpost += coef[y] * posts[static_cast<size_t>(y)];
        cpair += coef[y] * pairs[static_cast<size_t>(y)];
    }

    Eigen::VectorXd& g = *grad;
    // node parameters
    if (spec.node_model == NodeModel::OrdinalProbit) {
        const Eigen::VectorXd gz = (cpost.array() * otab.dz.array()).rowwise().sum();
        g.head(spec.feature_dim) -= bag.instances.transpose() * gz;
        // interior cuts: cut k (1-based) is the upper cut of level k and the
        // lower cut of level k+1
        Eigen::VectorXd gcut(L - 1);
        for (int k = 1; k <= L - 1; ++k)
            gcut[k - 1] = (cpost.col(k - 1).array() * otab.du.col(k - 1).array()).sum() +
                          (cpost.col(k).array() * otab.dl.col(k).array()).sum();
        double tail = gcut.sum();
        g[spec.feature_dim] -= tail;
        for (int j = 0; j < L - 2; ++j) {
            tail -= gcut[j];
            g[spec.feature_dim + 1 + j] -= std::exp(view.log_gaps[j]) * tail;
        }
    } else {
        // the softmax term cancels because the coefficients sum to zero per t
        const Eigen::MatrixXd gB = cpost.transpose() * bag.instances;  // L x d
        for (int l = 0; l < L; ++l)
            g.segment(l * spec.feature_dim, spec.feature_dim) -= gB.row(l).transpose();
    }
    // transitions
    {
        Eigen::Map<Eigen::MatrixXd> gW(g.data() + spec.trans_offset(), L, L);
        gW -= cpair;
    }
    if (spec.label_compat) {
        Eigen::Map<Eigen::MatrixXd> gG(g.data() + spec.compat_offset(), L, L);
        for (int y = 0; y < L; ++y)
            gG.col(y) -= coef[y] * posts[static_cast<size_t>(y)].colwise().sum().transpose();
    }
    if (spec.multi_instance) {
        double match = 0.0;
        for (int y = 0; y < L; ++y) match += coef[y] * posts[static_cast<size_t>(y)].col(y).sum();
        g[spec.dim() - 1] -= match;
    }
    return nll;
}

double regularizer(const ChainSpec& spec, const ChainParamsView& view, double alpha,
                   Eigen::VectorXd* grad) {
    double reg = 0.0;
    const int L = spec.num_levels;
    if (spec.node_model == NodeModel::OrdinalProbit) {
        reg += view.beta.squaredNorm();
        if (grad != nullptr) grad->head(spec.feature_dim) += 2.0 * alpha * view.beta;
    } else {
        reg += view.node_weights.squaredNorm();
        if (grad != nullptr)
            for (int l = 0; l < L; ++l)
                grad->segment(l * spec.feature_dim, spec.feature_dim) +=
                    2.0 * alpha * view.node_weights.row(l).transpose();
    }
    reg += view.transition.squaredNorm();
    if (grad != nullptr) {
        Eigen::Map<Eigen::MatrixXd> gW(grad->data() + spec.trans_offset(), L, L);
        gW += 2.0 * alpha * view.transition;
    }
    if (spec.label_compat) {
        reg += view.label_compat.squaredNorm();
        if (grad != nullptr) {
            Eigen::Map<Eigen::MatrixXd> gG(grad->data() + spec.compat_offset(), L, L);
            gG += 2.0 * alpha * view.label_compat;
        }
    }
    return alpha * reg;
}

double dataset_nll(const ChainSpec& spec, const Eigen::VectorXd& theta, const Dataset& ds,
                   double alpha, Eigen::VectorXd* grad, Exec exec) {
    const ChainParamsView view = unpack_chain(spec, theta);
    const int n = ds.num_bags();
    std::vector<double> bag_nll(static_cast<size_t>(n));
    std::vector<Eigen::VectorXd> bag_grad;
    if (grad != nullptr) bag_grad.assign(static_cast<size_t>(n), Eigen::VectorXd());

    // exceptions may not escape the worker threads
    std::exception_ptr error;
    parallel_for(n, exec, [&](int i) {
        try {
            Eigen::VectorXd* g = nullptr;
            if (grad != nullptr) {
                bag_grad[static_cast<size_t>(i)] = Eigen::VectorXd::Zero(spec.dim());
                g = &bag_grad[static_cast<size_t>(i)];
            }
            bag_nll[static_cast<size_t>(i)] =
                bag_nll_grad(spec, view, ds.bags[static_cast<size_t>(i)], g);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    });
    if (error) std::rethrow_exception(error);

    // reduce in bag order so results do not depend on the thread schedule
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += bag_nll[static_cast<size_t>(i)];
    if (grad != nullptr) {
        grad->setZero(spec.dim());
        for (int i = 0; i < n; ++i) *grad += bag_grad[static_cast<size_t>(i)];
    }
    total += regularizer(spec, view, alpha, grad);
    if (!std::isfinite(total))
        throw NumericError("chain model: non-finite objective");
    return total;
}

}  // namespace

ChainParamsView unpack_chain(const ChainSpec& spec, const Eigen::VectorXd& theta) {
    assert(theta.size() == spec.dim());
    const int L = spec.num_levels, d = spec.feature_dim;
    ChainParamsView v;
    if (spec.node_model == NodeModel::OrdinalProbit) {
        v.beta = theta.head(d);
        v.first_cut = theta[d];
        v.log_gaps = theta.segment(d + 1, L - 2);
    } else {
        v.node_weights.resize(L, d);
        for (int l = 0; l < L; ++l)
            v.node_weights.row(l) = theta.segment(l * d, d).transpose();
    }
    v.transition = Eigen::Map<const Eigen::MatrixXd>(theta.data() + spec.trans_offset(), L, L);
    if (spec.label_compat)
        v.label_compat =
            Eigen::Map<const Eigen::MatrixXd>(theta.data() + spec.compat_offset(), L, L);
    if (spec.multi_instance) v.card_weight = theta[spec.dim() - 1];
    return v;
}

Eigen::VectorXd pack_chain(const ChainSpec& spec, const ChainParamsView& view) {
    const int L = spec.num_levels, d = spec.feature_dim;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec.dim());
    if (spec.node_model == NodeModel::OrdinalProbit) {
        theta.head(d) = view.beta;
        theta[d] = view.first_cut;
        theta.segment(d + 1, L - 2) = view.log_gaps;
    } else {
        for (int l = 0; l < L; ++l)
            theta.segment(l * d, d) = view.node_weights.row(l).transpose();
    }
    Eigen::Map<Eigen::MatrixXd>(theta.data() + spec.trans_offset(), L, L) = view.transition;
    if (spec.label_compat)
        Eigen::Map<Eigen::MatrixXd>(theta.data() + spec.compat_offset(), L, L) =
            view.label_compat;
    if (spec.multi_instance) theta[spec.dim() - 1] = view.card_weight;
    return theta;
}

Eigen::VectorXd init_chain(const ChainSpec& spec, std::uint64_t seed) {
    const int L = spec.num_levels, d = spec.feature_dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    ChainParamsView v;
    v.transition = Eigen::MatrixXd::Zero(L, L);
    if (spec.label_compat) v.label_compat = Eigen::MatrixXd::Zero(L, L);
    if (spec.node_model == NodeModel::OrdinalProbit) {
        v.beta.resize(d);
        for (int i = 0; i < d; ++i) v.beta[i] = noise(rng);
        // interior cuts at standard-normal quantiles of equal mass
        std::vector<double> cuts(static_cast<size_t>(L) - 1);
        for (int k = 1; k <= L - 1; ++k)
            cuts[static_cast<size_t>(k) - 1] = norm_quantile(static_cast<double>(k) / L);
        v.first_cut = cuts.front();
        v.log_gaps.resize(L - 2);
        for (int j = 0; j < L - 2; ++j)
            v.log_gaps[j] = std::log(cuts[static_cast<size_t>(j) + 1] -
                                     cuts[static_cast<size_t>(j)]);
    } else {
        v.node_weights.resize(L, d);
        for (int l = 0; l < L; ++l)
            for (int i = 0; i < d; ++i) v.node_weights(l, i) = noise(rng);
    }
    return pack_chain(spec, v);
}

double chain_nll(const ChainSpec& spec, const Eigen::VectorXd& theta, const Dataset& ds,
                 double alpha, Exec exec) {
    return dataset_nll(spec, theta, ds, alpha, nullptr, exec);
}

double chain_nll_grad(const ChainSpec& spec, const Eigen::VectorXd& theta, const Dataset& ds,
                      double alpha, Eigen::VectorXd& grad, Exec exec) {
    return dataset_nll(spec, theta, ds, alpha, &grad, exec);
}

Eigen::VectorXd chain_log_partitions(const ChainSpec& spec, const ChainParamsView& view,
                                     const Bag& bag) {
    const int L = spec.num_levels;
    const Eigen::MatrixXd node_base = node_base_table(spec, view, bag.instances);
    Eigen::VectorXd log_z(L);
    for (int y = 1; y <= L; ++y)
        log_z[y - 1] = log_partition(build_lattice(spec, view, node_base, y));
    return log_z;
}

ChainPrediction chain_predict(const ChainSpec& spec, const ChainParamsView& view,
                              const Bag& bag) {
    ChainPrediction out;
    out.posterior = softmax_from_logz(chain_log_partitions(spec, view, bag));
    out.bag_label = argmax_low_tie(out.posterior) + 1;
    const Eigen::MatrixXd marg = chain_node_marginals(spec, view, bag, out.bag_label);
    out.instance_labels.resize(static_cast<size_t>(bag.length()));
    for (int t = 0; t < bag.length(); ++t)
        out.instance_labels[static_cast<size_t>(t)] =
            argmax_low_tie(marg.row(t).transpose()) + 1;
    return out;
}

Eigen::MatrixXd chain_node_marginals(const ChainSpec& spec, const ChainParamsView& view,
                                     const Bag& bag, Level y) {
    const Eigen::MatrixXd node_base = node_base_table(spec, view, bag.instances);
    const ChainLattice lat = build_lattice(spec, view, node_base, y);
    const ChainPosteriors fb = forward_backward(lat);
    if (spec.multi_instance) return fold_aug_nodes(fb.node, spec.num_levels);
    return fb.node;
}

}  // namespace midorf
