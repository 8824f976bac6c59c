#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace midorf {

// Objective callback: returns f(x) and writes the gradient into grad.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct MinimizeOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-5;  // stop when ||g||_2 < tolerance
    int memory = 10;
    int max_line_search_evals = 50;
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double fx = 0.0;
    double grad_norm = 0.0;
    bool converged = false;           // gradient tolerance reached
    bool line_search_failed = false;  // stopped early, best iterate returned
    int iterations = 0;
    int evaluations = 0;
    std::vector<double> objective_trace;  // value at start of each accepted iterate
    std::vector<double> grad_norm_trace;
};

// Limited-memory BFGS with a strong-Wolfe line search (c1 = 1e-4, c2 = 0.9).
// Non-finite objective values are treated as out-of-range steps and shrunk
// away; if no finite descent step exists the best iterate so far is returned
// with line_search_failed set.
MinimizeResult minimize(const Objective& fg, Eigen::VectorXd x0, const MinimizeOptions& options);

}  // namespace midorf
