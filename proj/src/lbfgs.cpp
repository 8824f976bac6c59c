#include "midorf/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace midorf {

namespace {

constexpr double kC1 = 1e-4;  // sufficient decrease
constexpr double kC2 = 0.9;   // curvature

struct Evaluation {
    double f = std::numeric_limits<double>::infinity();
    double dphi = 0.0;  // directional derivative g'd
};

class LineSearch {
public:
    LineSearch(const Objective& fg, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
               double f0, double dphi0, int max_evals)
        : fg_(fg), x_(x), dir_(dir), f0_(f0), dphi0_(dphi0), budget_(max_evals),
          grad_(x.size()) {}

    // Returns the accepted step length, or 0 on failure. On success xout,
    // fout, gout hold the new iterate.
    double run(Eigen::VectorXd& xout, double& fout, Eigen::VectorXd& gout, int& evals) {
        double a_prev = 0.0, f_prev = f0_;
        double a = 1.0;
        for (int i = 0; i < budget_; ++i) {
            Evaluation e = eval(a);
            if (!std::isfinite(e.f))  // stepped out of the finite region
                return finish(zoom(a_prev, f_prev, a), xout, fout, gout, evals);
            if (e.f > f0_ + kC1 * a * dphi0_ || (i > 0 && e.f >= f_prev))
                return finish(zoom(a_prev, f_prev, a), xout, fout, gout, evals);
            if (std::abs(e.dphi) <= -kC2 * dphi0_)
                return finish(a, xout, fout, gout, evals);
            if (e.dphi >= 0.0)
                return finish(zoom(a, e.f, a_prev), xout, fout, gout, evals);
            a_prev = a;
            f_prev = e.f;
            a *= 2.0;
        }
        return finish(0.0, xout, fout, gout, evals);
    }

private:
    Evaluation eval(double a) {
        ++used_;
        trial_ = x_ + a * dir_;
        Evaluation e;
        e.f = fg_(trial_, grad_);
        e.dphi = std::isfinite(e.f) ? grad_.dot(dir_) : 0.0;
        cache_a_ = a;
        cache_ = e;
        return e;
    }

    // Bisection zoom on the bracket (lo, hi) where lo satisfies Armijo.
    double zoom(double lo, double lo_f, double hi) {
        double best_armijo = lo > 0.0 ? lo : 0.0;
        for (int i = 0; i < budget_ - used_; ++i) {
            double a = 0.5 * (lo + hi);
            Evaluation e = eval(a);
            if (!std::isfinite(e.f) || e.f > f0_ + kC1 * a * dphi0_ || e.f >= lo_f) {
                hi = a;
            } else {
                if (std::abs(e.dphi) <= -kC2 * dphi0_) return a;
                best_armijo = a;
                if (e.dphi * (hi - lo) >= 0.0) hi = lo;
                lo = a;
                lo_f = e.f;
            }
            if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
        }
        return best_armijo;  // strong Wolfe unattainable in budget; Armijo point
    }

    double finish(double a, Eigen::VectorXd& xout, double& fout, Eigen::VectorXd& gout,
                  int& evals) {
        evals += used_;
        if (a <= 0.0) return 0.0;
        if (cache_a_ != a || !std::isfinite(cache_.f)) cache_ = eval(a);
        xout = trial_;
        fout = cache_.f;
        gout = grad_;
        return a;
    }

    const Objective& fg_;
    const Eigen::VectorXd& x_;
    const Eigen::VectorXd& dir_;
    double f0_, dphi0_;
    int budget_;
    int used_ = 0;
    Eigen::VectorXd trial_, grad_;
    double cache_a_ = -1.0;
    Evaluation cache_;
};

}  // namespace

MinimizeResult minimize(const Objective& fg, Eigen::VectorXd x0, const MinimizeOptions& options) {
    MinimizeResult res;
    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd g(n);
    double f = fg(x, g);
    res.evaluations = 1;
    if (!std::isfinite(f)) throw std::runtime_error("minimize: objective not finite at start");

    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;  // (s, y)
    Eigen::VectorXd dir(n), alpha_buf;

    res.objective_trace.push_back(f);
    res.grad_norm_trace.push_back(g.norm());

    for (int k = 0; k < options.max_iterations; ++k) {
        const double gnorm = g.norm();
        if (gnorm < options.gradient_tolerance) {
            res.converged = true;
            break;
        }

        // two-loop recursion
        dir = -g;
        const int m = static_cast<int>(pairs.size());
        alpha_buf.resize(m);
        for (int i = m - 1; i >= 0; --i) {
            const auto& [s, y] = pairs[static_cast<size_t>(i)];
            const double rho = 1.0 / y.dot(s);
            alpha_buf[i] = rho * s.dot(dir);
            dir -= alpha_buf[i] * y;
        }
        if (m > 0) {
            const auto& [s, y] = pairs.back();
            dir *= s.dot(y) / y.dot(y);
        } else {
            dir /= std::max(1.0, gnorm);  // conservative first step
        }
        for (int i = 0; i < m; ++i) {
            const auto& [s, y] = pairs[static_cast<size_t>(i)];
            const double rho = 1.0 / y.dot(s);
            dir += (alpha_buf[i] - rho * y.dot(dir)) * s;
        }

        double dphi0 = g.dot(dir);
        if (!(dphi0 < 0.0)) {  // fall back to steepest descent
            pairs.clear();
            dir = -g / std::max(1.0, gnorm);
            dphi0 = g.dot(dir);
        }

        Eigen::VectorXd x_new(n), g_new(n);
        double f_new = 0.0;
        LineSearch search(fg, x, dir, f, dphi0, options.max_line_search_evals);
        const double step = search.run(x_new, f_new, g_new, res.evaluations);
        if (step <= 0.0 || !(f_new < f)) {
            res.line_search_failed = true;
            break;
        }

        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            pairs.emplace_back(std::move(s), std::move(yv));
            if (static_cast<int>(pairs.size()) > options.memory) pairs.pop_front();
        }

        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        ++res.iterations;
        res.objective_trace.push_back(f);
        res.grad_norm_trace.push_back(g.norm());
    }

    res.x = std::move(x);
    res.fx = f;
    res.grad_norm = g.norm();
    return res;
}

}  // namespace midorf
