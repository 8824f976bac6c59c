#pragma once

#include <Eigen/Core>

#include "midorf/model.hpp"
#include "midorf/numerics.hpp"

namespace midorf {

// State of the auxiliary chain: ordinal level paired with the binary flag
// zeta marking whether the prefix h_{1:t} already contains the bag label.
struct AugmentedState {
    Level level = 1;  // 1..L
    int flag = 0;     // zeta in {0,1}
};

// log( Phi(b_l - beta'x) - Phi(b_{l-1} - beta'x) ), sigma = 1. The CDF
// difference is clamped below at 1e-300, so the result is finite.
double node_potential(const ModelParams& params, const Eigen::VectorXd& x, Level level);

// W[from, to]; the transition matrix is real-valued and need not be symmetric.
double edge_potential(const ModelParams& params, Level from, Level to);

// w * #{t : h_t = y} when max(h) = y, otherwise the impossible sentinel.
double cardinality_potential(const ModelParams& params, const LatentAssignment& h, Level y);

// Full compatibility score of (X, h, y): sum of node, edge and cardinality
// potentials. The model uses P proportional to exp(+energy); an energy of
// kImpossible means probability zero.
double total_energy(const ModelParams& params, const Bag& bag, const LatentAssignment& h,
                    Level y);

// Node potential of the auxiliary-variable chain. t is 1-based; the first and
// last time steps carry the boundary constraints that tie zeta to the MIOR
// property. Returns kImpossible for inadmissible (state, t) combinations.
double augmented_node(const ModelParams& params, const Eigen::VectorXd& x, AugmentedState state,
                      int t, int T, Level y);

// Edge potential of the auxiliary-variable chain: W[from.level, to.level] for
// the admissible flag transitions (0->0 with to.level != y, 0->1 with
// to.level == y, 1->1), kImpossible otherwise.
double augmented_edge(const ModelParams& params, AugmentedState from, AugmentedState to,
                      Level y);

// T x L table of node potentials for a whole bag (row t-1, column level-1).
Eigen::MatrixXd node_potential_table(const ModelParams& params, const Eigen::MatrixXd& instances);

}  // namespace midorf
