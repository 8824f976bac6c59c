#pragma once

#include "midorf/inference.hpp"
#include "midorf/model.hpp"

namespace midorf {

// Brute-force enumeration over all L^T latent assignments using the plain
// (non-augmented) energy. Independent of the forward-backward path; used as
// the test oracle for the dynamic program. Guarded at L^T <= 1e6.
struct OracleResult {
    double log_partition;
    Marginals marginals;
};

OracleResult oracle_enumerate(const ModelParams& params, const Bag& bag, Level y);

// Label posterior by enumeration.
Eigen::VectorXd oracle_label_posterior(const ModelParams& params, const Bag& bag);

// Exact MAP assignment under the plain energy for label y (ties keep the
// first assignment in enumeration order).
std::vector<Level> oracle_map_assignment(const ModelParams& params, const Bag& bag, Level y);

// Expected number of states equal to y under the conditional distribution
// p(h | X, y); used to cross-check the cardinality-weight gradient.
double oracle_expected_matches(const ModelParams& params, const Bag& bag, Level y);

}  // namespace midorf
