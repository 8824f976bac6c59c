#include "midorf/learning.hpp"

#include <chrono>
#include <cmath>

#include "midorf/chain_family.hpp"
#include "midorf/inference.hpp"
#include "midorf/lbfgs.hpp"
#include "midorf/metrics.hpp"

namespace midorf {

namespace {

ChainSpec midorf_spec(int feature_dim, int num_levels) {
    ChainSpec spec;
    spec.node_model = NodeModel::OrdinalProbit;
    spec.multi_instance = true;
    spec.label_compat = false;
    spec.num_levels = num_levels;
    spec.feature_dim = feature_dim;
    return spec;
}

ChainParamsView to_view(const ModelParams& params) {
    ChainParamsView v;
    v.beta = params.beta;
    v.first_cut = params.first_cut;
    v.log_gaps = params.log_gaps;
    v.transition = params.transition;
    v.card_weight = params.card_weight;
    return v;
}

ModelParams from_view(const ChainParamsView& v) {
    ModelParams p;
    p.beta = v.beta;
    p.first_cut = v.first_cut;
    p.log_gaps = v.log_gaps;
    p.transition = v.transition;
    p.card_weight = v.card_weight;
    return p;
}

}  // namespace

Eigen::VectorXd pack_params(const ModelParams& params) {
    return pack_chain(midorf_spec(params.feature_dim(), params.num_levels()), to_view(params));
}

ModelParams unpack_params(const Eigen::VectorXd& theta, int feature_dim, int num_levels) {
    return from_view(unpack_chain(midorf_spec(feature_dim, num_levels), theta));
}

double negative_log_likelihood(const ModelParams& params, const Dataset& ds, double alpha,
                               Exec exec) {
    require_valid(ds);
    const ChainSpec spec = midorf_spec(ds.feature_dim, ds.scale.num_levels);
    return chain_nll(spec, pack_params(params), training_view(ds), alpha, exec);
}

Eigen::VectorXd gradient(const ModelParams& params, const Dataset& ds, double alpha, Exec exec) {
    require_valid(ds);
    const ChainSpec spec = midorf_spec(ds.feature_dim, ds.scale.num_levels);
    Eigen::VectorXd g(spec.dim());
    chain_nll_grad(spec, pack_params(params), training_view(ds), alpha, g, exec);
    return g;
}

ModelParams initial_params(int feature_dim, int num_levels, std::uint64_t seed) {
    const ChainSpec spec = midorf_spec(feature_dim, num_levels);
    return from_view(unpack_chain(spec, init_chain(spec, seed)));
}

std::pair<ModelParams, TrainTrace> fit(const Dataset& ds, const TrainConfig& config) {
    require_valid(ds);
    const auto start = std::chrono::steady_clock::now();
    const ChainSpec spec = midorf_spec(ds.feature_dim, ds.scale.num_levels);
    const Dataset view = training_view(ds);

    MinimizeOptions opts;
    opts.max_iterations = config.max_iterations;
    opts.gradient_tolerance = config.gradient_tolerance;
    const Objective fg = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return chain_nll_grad(spec, theta, view, config.alpha, grad, config.exec);
    };

    MinimizeResult best;
    bool have_best = false;
    const int restarts = std::max(config.restarts, 1);
    for (int r = 0; r < restarts; ++r) {
        MinimizeResult res = minimize(fg, init_chain(spec, config.seed + static_cast<std::uint64_t>(r)), opts);
        if (!have_best || res.fx < best.fx) {
            best = std::move(res);
            have_best = true;
        }
    }

    TrainTrace trace;
    trace.objective = best.objective_trace;
    trace.grad_norm = best.grad_norm_trace;
    trace.iterations = best.iterations;
    trace.converged = best.converged;
    trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {from_view(unpack_chain(spec, best.x)), trace};
}

AlphaSelection select_alpha(const Dataset& train, const Dataset& validation,
                            const TrainConfig& config) {
    require_valid(train);
    require_valid(validation);
    if (config.alpha_grid.empty()) throw DataError("select_alpha: empty alpha grid");

    AlphaSelection out;
    bool have_best = false;
    double best_icc = 0.0;
    for (double alpha : config.alpha_grid) {
        TrainConfig c = config;
        c.alpha = alpha;
        auto [params, trace] = fit(train, c);
        std::vector<double> pred, truth;
        pred.reserve(validation.bags.size());
        truth.reserve(validation.bags.size());
        for (const Bag& bag : validation.bags) {
            pred.push_back(static_cast<double>(predict_bag_label(params, bag)));
            truth.push_back(static_cast<double>(bag.bag_label));
        }
        double icc = std::numeric_limits<double>::quiet_NaN();
        try {
            icc = icc_consistency(pred, truth);
        } catch (const MetricsError&) {
            // undefined ICC (constant predictions): leave NaN, grid point loses
        }
        out.validation_icc.push_back(icc);
        if (std::isnan(icc)) continue;
        const bool better =
            !have_best || icc > best_icc || (icc == best_icc && alpha > out.alpha);
        if (better) {
            best_icc = icc;
            out.alpha = alpha;
            out.params = params;
            out.trace = trace;
            have_best = true;
        }
    }
    if (!have_best)
        throw NumericError("select_alpha: validation ICC undefined for every grid value");
    return out;
}

}  // namespace midorf
