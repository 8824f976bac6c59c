#include <doctest.h>

#include <cmath>

#include "midorf/lbfgs.hpp"

using namespace midorf;

TEST_CASE("minimize solves a strictly convex quadratic") {
    // f(x) = 0.5 x'Ax - b'x with A diagonal
    Eigen::VectorXd diag(4);
    diag << 1.0, 4.0, 9.0, 0.5;
    Eigen::VectorXd b(4);
    b << 1.0, -2.0, 3.0, 0.25;
    const Objective fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = diag.asDiagonal() * x - b;
        return 0.5 * x.dot(diag.asDiagonal() * x) - b.dot(x);
    };
    MinimizeOptions opts;
    opts.gradient_tolerance = 1e-10;
    MinimizeResult res = minimize(fg, Eigen::VectorXd::Zero(4), opts);
    CHECK(res.converged);
    const Eigen::VectorXd expected = b.array() / diag.array();
    CHECK((res.x - expected).norm() < 1e-8);
}

TEST_CASE("minimize reaches the Rosenbrock minimum") {
    const Objective fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        g.resize(2);
        g[0] = -2.0 * a - 400.0 * x[0] * b;
        g[1] = 200.0 * b;
        return a * a + 100.0 * b * b;
    };
    MinimizeOptions opts;
    opts.max_iterations = 2000;
    opts.gradient_tolerance = 1e-8;
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    MinimizeResult res = minimize(fg, x0, opts);
    CHECK(res.converged);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("objective trace is non-increasing over accepted steps") {
    const Objective fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 4.0 * x.array().pow(3).matrix();
        return x.array().pow(4).sum();
    };
    Eigen::VectorXd x0(3);
    x0 << 2.0, -3.0, 1.5;
    MinimizeResult res = minimize(fg, x0, MinimizeOptions{});
    for (size_t i = 1; i < res.objective_trace.size(); ++i)
        CHECK(res.objective_trace[i] <= res.objective_trace[i - 1]);
}

TEST_CASE("zero iteration budget returns the start point") {
    const Objective fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g = 2.0 * x;
        return x.squaredNorm();
    };
    MinimizeOptions opts;
    opts.max_iterations = 0;
    Eigen::VectorXd x0(2);
    x0 << 3.0, -1.0;
    MinimizeResult res = minimize(fg, x0, opts);
    CHECK(res.x == x0);
    CHECK(res.iterations == 0);
    CHECK(!res.converged);
}

TEST_CASE("non-finite regions are stepped around") {
    // objective is +inf left of x = -1; minimum at x = 0
    const Objective fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        g.resize(1);
        if (x[0] < -1.0) {
            g[0] = 0.0;
            return std::numeric_limits<double>::infinity();
        }
        g[0] = 2.0 * x[0];
        return x.squaredNorm();
    };
    Eigen::VectorXd x0(1);
    x0 << 5.0;
    MinimizeResult res = minimize(fg, x0, MinimizeOptions{});
    CHECK(res.x[0] == doctest::Approx(0.0).epsilon(1e-5));
}
