#pragma once

#include <Eigen/Core>
#include <vector>

#include "midorf/numerics.hpp"

namespace midorf {

// A linear chain of S-state variables in the log domain: per-step node scores
// and a time-invariant transition table. Entries may be kImpossible.
struct ChainLattice {
    Eigen::MatrixXd node;   // T x S
    Eigen::MatrixXd trans;  // S x S, trans(from, to)

    int length() const { return static_cast<int>(node.rows()); }
    int states() const { return static_cast<int>(node.cols()); }
};

struct ChainPosteriors {
    double log_partition = kImpossible;
    Eigen::MatrixXd node;      // T x S, p(state at t); zero where inadmissible
    Eigen::MatrixXd pair_sum;  // S x S, sum over t of pairwise posteriors
};

// Production kernel: log-space forward-backward where each log-sum-exp step
// is evaluated as a max-shifted matrix-vector product against the
// exponentiated transition table.
double log_partition(const ChainLattice& lattice);
ChainPosteriors forward_backward(const ChainLattice& lattice);

// Straightforward serial implementation (per-entry log-sum-exp loops with
// explicit sentinel checks). Kept as the reference the fast kernel is tested
// and benchmarked against.
double log_partition_reference(const ChainLattice& lattice);
ChainPosteriors forward_backward_reference(const ChainLattice& lattice);

// Per-step pairwise posteriors p(s_t, s_{t+1}); T-1 slices of S x S.
std::vector<Eigen::MatrixXd> pairwise_marginals(const ChainLattice& lattice);

// Lattice of the auxiliary-variable chain for target label y (1-based).
// States are indexed s = flag * L + (level - 1). node_table holds the plain
// T x L node potentials; card_weight is added at level == y and the boundary
// rules for t = 1 and t = T are applied.
ChainLattice build_augmented_lattice(const Eigen::MatrixXd& node_table,
                                     const Eigen::MatrixXd& transition, double card_weight,
                                     int y);

// Sum the auxiliary flag out of augmented posteriors: T x 2L -> T x L node
// rows, 2L x 2L -> L x L pairwise tables.
Eigen::MatrixXd fold_aug_nodes(const Eigen::MatrixXd& aug_post, int L);
Eigen::MatrixXd fold_aug_pairs(const Eigen::MatrixXd& aug_pair, int L);

}  // namespace midorf
