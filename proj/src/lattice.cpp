#include "midorf/lattice.hpp"

#include <cassert>
#include <cmath>

namespace midorf {

namespace {

// Largest finite entry, or kImpossible when none.
double finite_max(const Eigen::Ref<const Eigen::VectorXd>& v) {
    double m = kImpossible;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!is_impossible(v[i]) && v[i] > m) m = v[i];
    return m;
}

// exp(v - shift) with impossible entries mapped to weight zero.
Eigen::VectorXd shifted_exp(const Eigen::Ref<const Eigen::VectorXd>& v, double shift) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out[i] = is_impossible(v[i]) ? 0.0 : std::exp(v[i] - shift);
    return out;
}

struct TransWeights {
    Eigen::MatrixXd weights;  // exp(trans - shift), zeros for impossible
    double shift = 0.0;
};

TransWeights exp_transitions(const Eigen::MatrixXd& trans) {
    TransWeights tw;
    double m = 0.0;
    bool any = false;
    for (Eigen::Index i = 0; i < trans.size(); ++i) {
        double v = trans.data()[i];
        if (!is_impossible(v)) {
            m = any ? std::max(m, v) : v;
            any = true;
        }
    }
    tw.shift = any ? m : 0.0;
    tw.weights.resize(trans.rows(), trans.cols());
    for (Eigen::Index i = 0; i < trans.size(); ++i) {
        double v = trans.data()[i];
        tw.weights.data()[i] = is_impossible(v) ? 0.0 : std::exp(v - tw.shift);
    }
    return tw;
}

// Forward pass in the log domain; alpha(t, s) = log sum over prefixes.
// Returns false when no admissible path reaches the end.
bool forward_pass(const ChainLattice& lattice, const TransWeights& tw, Eigen::MatrixXd& alpha) {
    const int T = lattice.length(), S = lattice.states();
    alpha.resize(T, S);
    alpha.row(0) = lattice.node.row(0);
    for (int t = 0; t + 1 < T; ++t) {
        const double m = finite_max(alpha.row(t).transpose());
        if (is_impossible(m)) return false;
        const Eigen::VectorXd ea = shifted_exp(alpha.row(t).transpose(), m);
        const Eigen::VectorXd acc = tw.weights.transpose() * ea;
        for (int s = 0; s < S; ++s) {
            const double node = lattice.node(t + 1, s);
            alpha(t + 1, s) = (acc[s] > 0.0 && !is_impossible(node))
                                  ? node + m + tw.shift + std::log(acc[s])
                                  : kImpossible;
        }
    }
    return !is_impossible(finite_max(alpha.row(T - 1).transpose()));
}

void backward_pass(const ChainLattice& lattice, const TransWeights& tw, Eigen::MatrixXd& beta) {
    const int T = lattice.length(), S = lattice.states();
    beta.resize(T, S);
    beta.row(T - 1).setZero();
    for (int t = T - 2; t >= 0; --t) {
        Eigen::VectorXd nb = lattice.node.row(t + 1).transpose();
        for (int s = 0; s < S; ++s) nb[s] = score_add(nb[s], beta(t + 1, s));
        const double m = finite_max(nb);
        if (is_impossible(m)) {
            beta.row(t).setConstant(kImpossible);
            continue;
        }
        const Eigen::VectorXd enb = shifted_exp(nb, m);
        const Eigen::VectorXd acc = tw.weights * enb;
        for (int s = 0; s < S; ++s)
            beta(t, s) = acc[s] > 0.0 ? m + tw.shift + std::log(acc[s]) : kImpossible;
    }
}

double lse_row(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double m = finite_max(v);
    if (is_impossible(m)) return kImpossible;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!is_impossible(v[i])) s += std::exp(v[i] - m);
    return m + std::log(s);
}

}  // namespace

double log_partition(const ChainLattice& lattice) {
    assert(lattice.length() >= 1);
    const TransWeights tw = exp_transitions(lattice.trans);
    Eigen::MatrixXd alpha;
    if (!forward_pass(lattice, tw, alpha)) return kImpossible;
    return lse_row(alpha.row(lattice.length() - 1).transpose());
}

ChainPosteriors forward_backward(const ChainLattice& lattice) {
    const int T = lattice.length(), S = lattice.states();
    ChainPosteriors out;
    out.node = Eigen::MatrixXd::Zero(T, S);
    out.pair_sum = Eigen::MatrixXd::Zero(S, S);

    const TransWeights tw = exp_transitions(lattice.trans);
    Eigen::MatrixXd alpha, beta;
    if (!forward_pass(lattice, tw, alpha)) return out;
    out.log_partition = lse_row(alpha.row(T - 1).transpose());
    backward_pass(lattice, tw, beta);

    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s) {
            const double v = score_add(alpha(t, s), beta(t, s));
            out.node(t, s) = is_impossible(v) ? 0.0 : std::exp(v - out.log_partition);
        }

    // pairwise expectations, summed over t
    for (int t = 0; t + 1 < T; ++t) {
        const double ma = finite_max(alpha.row(t).transpose());
        Eigen::VectorXd nb = lattice.node.row(t + 1).transpose();
        for (int s = 0; s < S; ++s) nb[s] = score_add(nb[s], beta(t + 1, s));
        const double mb = finite_max(nb);
        if (is_impossible(ma) || is_impossible(mb)) continue;
        const double scale_log = ma + mb + tw.shift - out.log_partition;
        if (scale_log < 300.0) {
            const Eigen::VectorXd ea = shifted_exp(alpha.row(t).transpose(), ma) *
                                       std::exp(scale_log);
            const Eigen::VectorXd enb = shifted_exp(nb, mb);
            out.pair_sum.noalias() += (ea * enb.transpose()).cwiseProduct(tw.weights);
        } else {
            // extreme transition scores: fall back to per-entry evaluation
            for (int s = 0; s < S; ++s)
                for (int s2 = 0; s2 < S; ++s2) {
                    double v = score_add(score_add(alpha(t, s), lattice.trans(s, s2)), nb[s2]);
                    if (!is_impossible(v)) out.pair_sum(s, s2) += std::exp(v - out.log_partition);
                }
        }
    }
    return out;
}

double log_partition_reference(const ChainLattice& lattice) {
    const int T = lattice.length(), S = lattice.states();
    Eigen::MatrixXd alpha(T, S);
    alpha.row(0) = lattice.node.row(0);
    std::vector<double> terms(static_cast<size_t>(S));
    for (int t = 0; t + 1 < T; ++t)
        for (int s2 = 0; s2 < S; ++s2) {
            for (int s = 0; s < S; ++s)
                terms[static_cast<size_t>(s)] = score_add(alpha(t, s), lattice.trans(s, s2));
            alpha(t + 1, s2) = score_add(lattice.node(t + 1, s2), log_sum_exp(terms));
        }
    for (int s = 0; s < S; ++s) terms[static_cast<size_t>(s)] = alpha(T - 1, s);
    return log_sum_exp(terms);
}

ChainPosteriors forward_backward_reference(const ChainLattice& lattice) {
    const int T = lattice.length(), S = lattice.states();
    ChainPosteriors out;
    out.node = Eigen::MatrixXd::Zero(T, S);
    out.pair_sum = Eigen::MatrixXd::Zero(S, S);

    Eigen::MatrixXd alpha(T, S), beta(T, S);
    std::vector<double> terms(static_cast<size_t>(S));
    alpha.row(0) = lattice.node.row(0);
    for (int t = 0; t + 1 < T; ++t)
        for (int s2 = 0; s2 < S; ++s2) {
            for (int s = 0; s < S; ++s)
                terms[static_cast<size_t>(s)] = score_add(alpha(t, s), lattice.trans(s, s2));
            alpha(t + 1, s2) = score_add(lattice.node(t + 1, s2), log_sum_exp(terms));
        }
    for (int s = 0; s < S; ++s) terms[static_cast<size_t>(s)] = alpha(T - 1, s);
    out.log_partition = log_sum_exp(terms);
    if (is_impossible(out.log_partition)) return out;

    beta.row(T - 1).setZero();
    for (int t = T - 2; t >= 0; --t)
        for (int s = 0; s < S; ++s) {
            for (int s2 = 0; s2 < S; ++s2)
                terms[static_cast<size_t>(s2)] = score_add(
                    lattice.trans(s, s2), score_add(lattice.node(t + 1, s2), beta(t + 1, s2)));
            beta(t, s) = log_sum_exp(terms);
        }

    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s) {
            const double v = score_add(alpha(t, s), beta(t, s));
            out.node(t, s) = is_impossible(v) ? 0.0 : std::exp(v - out.log_partition);
        }
    for (int t = 0; t + 1 < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int s2 = 0; s2 < S; ++s2) {
                double v = score_add(
                    score_add(alpha(t, s), lattice.trans(s, s2)),
                    score_add(lattice.node(t + 1, s2), beta(t + 1, s2)));
                if (!is_impossible(v)) out.pair_sum(s, s2) += std::exp(v - out.log_partition);
            }
    return out;
}

std::vector<Eigen::MatrixXd> pairwise_marginals(const ChainLattice& lattice) {
    const int T = lattice.length(), S = lattice.states();
    std::vector<Eigen::MatrixXd> pairs;
    if (T < 2) return pairs;
    pairs.reserve(static_cast<size_t>(T) - 1);

    const TransWeights tw = exp_transitions(lattice.trans);
    Eigen::MatrixXd alpha, beta;
    if (!forward_pass(lattice, tw, alpha)) {
        pairs.assign(static_cast<size_t>(T) - 1, Eigen::MatrixXd::Zero(S, S));
        return pairs;
    }
    const double logZ = lse_row(alpha.row(T - 1).transpose());
    backward_pass(lattice, tw, beta);
    for (int t = 0; t + 1 < T; ++t) {
        Eigen::MatrixXd slice = Eigen::MatrixXd::Zero(S, S);
        Eigen::VectorXd nb = lattice.node.row(t + 1).transpose();
        for (int s = 0; s < S; ++s) nb[s] = score_add(nb[s], beta(t + 1, s));
        for (int s = 0; s < S; ++s)
            for (int s2 = 0; s2 < S; ++s2) {
                double v = score_add(score_add(alpha(t, s), lattice.trans(s, s2)), nb[s2]);
                if (!is_impossible(v)) slice(s, s2) = std::exp(v - logZ);
            }
        pairs.push_back(std::move(slice));
    }
    return pairs;
}

ChainLattice build_augmented_lattice(const Eigen::MatrixXd& node_table,
                                     const Eigen::MatrixXd& transition, double card_weight,
                                     int y) {
    const int T = static_cast<int>(node_table.rows());
    const int L = static_cast<int>(node_table.cols());
    assert(y >= 1 && y <= L);
    const int S = 2 * L;
    ChainLattice lat;
    lat.node = Eigen::MatrixXd::Constant(T, S, kImpossible);
    lat.trans = Eigen::MatrixXd::Constant(S, S, kImpossible);

    for (int t = 0; t < T; ++t)
        for (int l = 1; l <= y; ++l) {
            const double v = node_table(t, l - 1) + (l == y ? card_weight : 0.0);
            lat.node(t, l - 1) = v;      // flag 0
            lat.node(t, L + l - 1) = v;  // flag 1
        }
    // t = 1: flag 0 requires level < y, flag 1 requires level = y
    for (int l = 1; l <= L; ++l) {
        if (l >= y) lat.node(0, l - 1) = kImpossible;
        if (l != y) lat.node(0, L + l - 1) = kImpossible;
    }
    // t = T: flag must be 1
    lat.node.row(T - 1).head(L).setConstant(kImpossible);

    for (int lf = 1; lf <= L; ++lf)
        for (int lt = 1; lt <= L; ++lt) {
            const double w = transition(lf - 1, lt - 1);
            if (lt != y) lat.trans(lf - 1, lt - 1) = w;          // 0 -> 0
            if (lt == y) lat.trans(lf - 1, L + lt - 1) = w;      // 0 -> 1
            lat.trans(L + lf - 1, L + lt - 1) = w;               // 1 -> 1
        }
    return lat;
}

Eigen::MatrixXd fold_aug_nodes(const Eigen::MatrixXd& aug_post, int L) {
    return aug_post.leftCols(L) + aug_post.rightCols(L);
}

Eigen::MatrixXd fold_aug_pairs(const Eigen::MatrixXd& aug_pair, int L) {
    return aug_pair.topLeftCorner(L, L) + aug_pair.topRightCorner(L, L) +
           aug_pair.bottomLeftCorner(L, L) + aug_pair.bottomRightCorner(L, L);
}

}  // namespace midorf
