#include "midorf/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "midorf/inference.hpp"
#include "midorf/lbfgs.hpp"
#include "midorf/metrics.hpp"
#include "midorf/numerics.hpp"

namespace midorf {

namespace {

constexpr double kProbFloor = 1e-300;
constexpr int kMiOrMaxIterations = 50;

std::vector<double> decode_or_cuts(const OrdinalRegressorParams& p, int L) {
    std::vector<double> cuts(static_cast<size_t>(L) + 1);
    cuts.front() = -std::numeric_limits<double>::infinity();
    cuts.back() = std::numeric_limits<double>::infinity();
    double b = p.first_cut;
    cuts[1] = b;
    for (int l = 0; l < L - 2; ++l) {
        b += std::exp(p.log_gaps[l]);
        cuts[static_cast<size_t>(l) + 2] = b;
    }
    return cuts;
}

OrdinalRegressorParams unpack_or(const Eigen::VectorXd& theta, int d, int L) {
    OrdinalRegressorParams p;
    p.beta = theta.head(d);
    p.first_cut = theta[d];
    p.log_gaps = theta.segment(d + 1, L - 2);
    return p;
}

Eigen::VectorXd pack_or(const OrdinalRegressorParams& p) {
    Eigen::VectorXd theta(p.beta.size() + 1 + p.log_gaps.size());
    theta.head(p.beta.size()) = p.beta;
    theta[p.beta.size()] = p.first_cut;
    theta.tail(p.log_gaps.size()) = p.log_gaps;
    return theta;
}

// Instance-level ordinal probit NLL over (X, labels) with ridge on beta.
double or_nll_grad(const Eigen::VectorXd& theta, const Eigen::MatrixXd& X,
                   const std::vector<Level>& labels, int L, double alpha,
                   Eigen::VectorXd& grad) {
    const int d = static_cast<int>(X.cols());
    const OrdinalRegressorParams p = unpack_or(theta, d, L);
    const std::vector<double> cuts = decode_or_cuts(p, L);
    const Eigen::VectorXd z = X * p.beta;

    double nll = 0.0;
    grad.setZero(theta.size());
    Eigen::VectorXd gcut = Eigen::VectorXd::Zero(L - 1);
    for (int i = 0; i < X.rows(); ++i) {
        const int l = labels[static_cast<size_t>(i)];
        const double lo = cuts[static_cast<size_t>(l) - 1];
        const double hi = cuts[static_cast<size_t>(l)];
        const double D = interval_prob(lo, hi, z[i]);
        nll -= std::log(D);
        if (D <= kProbFloor) continue;  // clamped: flat region, no gradient
        const double pu = (l == L) ? 0.0 : norm_pdf(hi - z[i]);
        const double pl = (l == 1) ? 0.0 : norm_pdf(lo - z[i]);
        grad.head(d) -= ((pl - pu) / D) * X.row(i).transpose();
        if (l <= L - 1) gcut[l - 1] -= pu / D;   // upper cut of level l is b_l
        if (l >= 2) gcut[l - 2] -= -pl / D;      // lower cut is b_{l-1}
    }
    double tail = gcut.sum();
    grad[d] += tail;
    for (int j = 0; j < L - 2; ++j) {
        tail -= gcut[j];
        grad[d + 1 + j] += std::exp(p.log_gaps[j]) * tail;
    }
    nll += alpha * p.beta.squaredNorm();
    grad.head(d) += 2.0 * alpha * p.beta;
    return nll;
}

Eigen::VectorXd init_or(int d, int L, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    OrdinalRegressorParams p;
    p.beta.resize(d);
    for (int i = 0; i < d; ++i) p.beta[i] = noise(rng);
    std::vector<double> cuts(static_cast<size_t>(L) - 1);
    for (int k = 1; k <= L - 1; ++k)
        cuts[static_cast<size_t>(k) - 1] = norm_quantile(static_cast<double>(k) / L);
    p.first_cut = cuts.front();
    p.log_gaps.resize(L - 2);
    for (int j = 0; j < L - 2; ++j)
        p.log_gaps[j] = std::log(cuts[static_cast<size_t>(j) + 1] - cuts[static_cast<size_t>(j)]);
    return pack_or(p);
}

OrdinalRegressorParams fit_or(const Eigen::MatrixXd& X, const std::vector<Level>& labels, int L,
                              const TrainConfig& config, const Eigen::VectorXd* warm,
                              MinimizeResult* out_result = nullptr) {
    MinimizeOptions opts;
    opts.max_iterations = config.max_iterations;
    opts.gradient_tolerance = config.gradient_tolerance;
    const Objective fg = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return or_nll_grad(theta, X, labels, L, config.alpha, grad);
    };
    Eigen::VectorXd x0 = warm != nullptr
                             ? *warm
                             : init_or(static_cast<int>(X.cols()), L, config.seed);
    MinimizeResult res = minimize(fg, std::move(x0), opts);
    if (out_result != nullptr) *out_result = res;
    return unpack_or(res.x, static_cast<int>(X.cols()), L);
}

std::vector<Level> or_predict(const OrdinalRegressorParams& p, int L,
                              const Eigen::MatrixXd& X) {
    const std::vector<double> cuts = decode_or_cuts(p, L);
    const Eigen::VectorXd z = X * p.beta;
    std::vector<Level> out(static_cast<size_t>(X.rows()));
    for (int i = 0; i < X.rows(); ++i) {
        int best = 1;
        double best_lp = log_interval_prob(cuts[0], cuts[1], z[i]);
        for (int l = 2; l <= L; ++l) {
            const double lp =
                log_interval_prob(cuts[static_cast<size_t>(l) - 1], cuts[static_cast<size_t>(l)],
                                  z[i]);
            if (lp > best_lp) {
                best_lp = lp;
                best = l;
            }
        }
        out[static_cast<size_t>(i)] = best;
    }
    return out;
}

// Stack all instances of a dataset with one label per instance.
void stack_instances(const Dataset& ds, Eigen::MatrixXd& X, std::vector<int>& bag_of_row) {
    long rows = 0;
    for (const Bag& bag : ds.bags) rows += bag.length();
    X.resize(rows, ds.feature_dim);
    bag_of_row.resize(static_cast<size_t>(rows));
    long r = 0;
    for (size_t b = 0; b < ds.bags.size(); ++b) {
        const Bag& bag = ds.bags[b];
        X.middleRows(r, bag.length()) = bag.instances;
        for (int t = 0; t < bag.length(); ++t)
            bag_of_row[static_cast<size_t>(r + t)] = static_cast<int>(b);
        r += bag.length();
    }
}

TrainedModel train_sil_or(const Dataset& ds, const TrainConfig& config) {
    Eigen::MatrixXd X;
    std::vector<int> bag_of_row;
    stack_instances(ds, X, bag_of_row);
    std::vector<Level> labels(bag_of_row.size());
    for (size_t i = 0; i < labels.size(); ++i)
        labels[i] = ds.bags[static_cast<size_t>(bag_of_row[i])].bag_label;

    MinimizeResult res;
    OrdinalRegressorParams p = fit_or(X, labels, ds.scale.num_levels, config, nullptr, &res);
    TrainedModel model{Method::SilOr, ds.scale.num_levels, ds.feature_dim, p, {}};
    model.trace.objective = res.objective_trace;
    model.trace.grad_norm = res.grad_norm_trace;
    model.trace.iterations = res.iterations;
    model.trace.converged = res.converged;
    return model;
}

TrainedModel train_mi_or(const Dataset& ds, const TrainConfig& config) {
    const int L = ds.scale.num_levels;
    Eigen::MatrixXd X;
    std::vector<int> bag_of_row;
    stack_instances(ds, X, bag_of_row);

    // initialize exactly as SIL-OR
    std::vector<Level> labels(bag_of_row.size());
    for (size_t i = 0; i < labels.size(); ++i)
        labels[i] = ds.bags[static_cast<size_t>(bag_of_row[i])].bag_label;
    OrdinalRegressorParams p = fit_or(X, labels, L, config, nullptr);

    int iterations = 0;
    for (int it = 0; it < kMiOrMaxIterations; ++it) {
        ++iterations;
        // predict per bag, correct to satisfy the MIOR property
        std::vector<Level> corrected(labels.size());
        size_t row = 0;
        for (const Bag& bag : ds.bags) {
            std::vector<Level> preds = or_predict(p, L, bag.instances);
            std::vector<Level> fixed = mi_or_correct(preds, bag.bag_label);
            std::copy(fixed.begin(), fixed.end(), corrected.begin() + static_cast<long>(row));
            row += fixed.size();
        }
        if (corrected == labels) break;  // fixed point
        labels = std::move(corrected);
        const Eigen::VectorXd warm = pack_or(p);
        p = fit_or(X, labels, L, config, &warm);
    }
    TrainedModel model{Method::MiOr, L, ds.feature_dim, p, {}};
    model.trace.iterations = iterations;
    model.trace.converged = iterations < kMiOrMaxIterations;
    return model;
}

double mir_nll_grad(const Eigen::VectorXd& theta, const Dataset& ds, double gamma, double alpha,
                    Eigen::VectorXd& grad) {
    double loss = 0.0;
    grad.setZero(theta.size());
    for (const Bag& bag : ds.bags) {
        const Eigen::VectorXd s = bag.instances * theta;
        const double m = s.maxCoeff();
        const Eigen::VectorXd e = ((s.array() - m) * gamma).exp();
        const double sum = e.sum();
        const double aggregate = m + std::log(sum) / gamma;
        const double resid = aggregate - static_cast<double>(bag.bag_label);
        loss += resid * resid;
        const Eigen::VectorXd softmax = e / sum;
        grad += 2.0 * resid * (bag.instances.transpose() * softmax);
    }
    loss += alpha * theta.squaredNorm();
    grad += 2.0 * alpha * theta;
    return loss;
}

TrainedModel train_mir(const Dataset& ds, const TrainConfig& config) {
    MirParams p;
    p.gamma = 1.0;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    Eigen::VectorXd x0(ds.feature_dim);
    for (int i = 0; i < ds.feature_dim; ++i) x0[i] = noise(rng);

    MinimizeOptions opts;
    opts.max_iterations = config.max_iterations;
    opts.gradient_tolerance = config.gradient_tolerance;
    const double gamma = p.gamma;
    const Objective fg = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return mir_nll_grad(theta, ds, gamma, config.alpha, grad);
    };
    MinimizeResult res = minimize(fg, std::move(x0), opts);
    p.theta = res.x;
    TrainedModel model{Method::Mir, ds.scale.num_levels, ds.feature_dim, p, {}};
    model.trace.objective = res.objective_trace;
    model.trace.grad_norm = res.grad_norm_trace;
    model.trace.iterations = res.iterations;
    model.trace.converged = res.converged;
    return model;
}

TrainedModel train_chain_method(Method method, const Dataset& ds, const TrainConfig& config) {
    const ChainSpec spec = chain_spec_for(method, ds.feature_dim, ds.scale.num_levels);
    MinimizeOptions opts;
    opts.max_iterations = config.max_iterations;
    opts.gradient_tolerance = config.gradient_tolerance;
    const Objective fg = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return chain_nll_grad(spec, theta, ds, config.alpha, grad, config.exec);
    };
    MinimizeResult best;
    bool have_best = false;
    for (int r = 0; r < std::max(config.restarts, 1); ++r) {
        MinimizeResult res =
            minimize(fg, init_chain(spec, config.seed + static_cast<std::uint64_t>(r)), opts);
        if (!have_best || res.fx < best.fx) {
            best = std::move(res);
            have_best = true;
        }
    }
    const ChainParamsView v = unpack_chain(spec, best.x);

    TrainedModel model;
    model.method = method;
    model.num_levels = ds.scale.num_levels;
    model.feature_dim = ds.feature_dim;
    if (method == Method::MiHcrf)
        model.params = MiHcrfParams{v.node_weights, v.transition, v.card_weight};
    else if (method == Method::Hcrf)
        model.params = HcrfParams{v.node_weights, v.transition, v.label_compat};
    else
        model.params = HcorfParams{v.beta, v.first_cut, v.log_gaps, v.transition, v.label_compat};
    model.trace.objective = best.objective_trace;
    model.trace.grad_norm = best.grad_norm_trace;
    model.trace.iterations = best.iterations;
    model.trace.converged = best.converged;
    return model;
}

ChainParamsView view_of(const TrainedModel& model) {
    ChainParamsView v;
    if (const auto* p = std::get_if<MiHcrfParams>(&model.params)) {
        v.node_weights = p->node_weights;
        v.transition = p->transition;
        v.card_weight = p->card_weight;
    } else if (const auto* p = std::get_if<HcrfParams>(&model.params)) {
        v.node_weights = p->node_weights;
        v.transition = p->transition;
        v.label_compat = p->label_compat;
    } else if (const auto* p = std::get_if<HcorfParams>(&model.params)) {
        v.beta = p->beta;
        v.first_cut = p->first_cut;
        v.log_gaps = p->log_gaps;
        v.transition = p->transition;
        v.label_compat = p->label_compat;
    } else {
        throw std::logic_error("view_of: not a chain baseline");
    }
    return v;
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::MiDorf: return "midorf";
        case Method::SilOr: return "sil-or";
        case Method::MiOr: return "mi-or";
        case Method::Mir: return "mir";
        case Method::MiHcrf: return "mi-hcrf";
        case Method::Hcrf: return "hcrf";
        case Method::Hcorf: return "hcorf";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    for (Method m : all_methods())
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown method '" + name + "'");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods{Method::MiDorf, Method::SilOr, Method::MiOr,
                                             Method::Mir,    Method::MiHcrf, Method::Hcrf,
                                             Method::Hcorf};
    return methods;
}

ChainSpec chain_spec_for(Method method, int feature_dim, int num_levels) {
    ChainSpec spec;
    spec.num_levels = num_levels;
    spec.feature_dim = feature_dim;
    switch (method) {
        case Method::MiDorf:
            spec.node_model = NodeModel::OrdinalProbit;
            spec.multi_instance = true;
            spec.label_compat = false;
            break;
        case Method::MiHcrf:
            spec.node_model = NodeModel::Multinomial;
            spec.multi_instance = true;
            spec.label_compat = false;
            break;
        case Method::Hcrf:
            spec.node_model = NodeModel::Multinomial;
            spec.multi_instance = false;
            spec.label_compat = true;
            break;
        case Method::Hcorf:
            spec.node_model = NodeModel::OrdinalProbit;
            spec.multi_instance = false;
            spec.label_compat = true;
            break;
        default:
            throw std::invalid_argument("chain_spec_for: " + to_string(method) +
                                        " is not a latent-chain method");
    }
    return spec;
}

double mir_aggregate(const MirParams& params, const Eigen::MatrixXd& instances) {
    const Eigen::VectorXd s = instances * params.theta;
    const double m = s.maxCoeff();
    return m + std::log(((s.array() - m) * params.gamma).exp().sum()) / params.gamma;
}

std::vector<Level> mi_or_correct(const std::vector<Level>& predictions, Level bag_label) {
    std::vector<Level> out = predictions;
    for (Level& l : out) l = std::min(l, bag_label);
    const Level max_pred = *std::max_element(predictions.begin(), predictions.end());
    if (max_pred < bag_label) {
        for (size_t i = 0; i < out.size(); ++i)
            if (predictions[i] == max_pred) out[i] = bag_label;
    }
    return out;
}

TrainedModel train_method(Method method, const Dataset& ds, const TrainConfig& config) {
    require_valid(ds);
    const Dataset view = training_view(ds);
    const auto start = std::chrono::steady_clock::now();
    TrainedModel model;
    switch (method) {
        case Method::MiDorf: {
            auto [params, trace] = fit(view, config);
            model = TrainedModel{method, ds.scale.num_levels, ds.feature_dim, params, trace};
            break;
        }
        case Method::SilOr:
            model = train_sil_or(view, config);
            break;
        case Method::MiOr:
            model = train_mi_or(view, config);
            break;
        case Method::Mir:
            model = train_mir(view, config);
            break;
        default:
            model = train_chain_method(method, view, config);
            break;
    }
    model.trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return model;
}

Level predict_bag(const TrainedModel& model, const Bag& bag) {
    switch (model.method) {
        case Method::MiDorf:
            return predict_bag_label(std::get<ModelParams>(model.params), bag);
        case Method::SilOr:
        case Method::MiOr: {
            const auto& p = std::get<OrdinalRegressorParams>(model.params);
            std::vector<Level> preds = or_predict(p, model.num_levels, bag.instances);
            return *std::max_element(preds.begin(), preds.end());
        }
        case Method::Mir: {
            const auto& p = std::get<MirParams>(model.params);
            const double m = mir_aggregate(p, bag.instances);
            return static_cast<Level>(
                std::clamp<long>(std::lround(m), 1, model.num_levels));
        }
        default: {
            const ChainSpec spec = chain_spec_for(model.method, model.feature_dim,
                                                  model.num_levels);
            return chain_predict(spec, view_of(model), bag).bag_label;
        }
    }
}

std::vector<Level> predict_instances(const TrainedModel& model, const Bag& bag) {
    switch (model.method) {
        case Method::MiDorf:
            return predict_instance_labels(std::get<ModelParams>(model.params), bag);
        case Method::SilOr:
        case Method::MiOr:
            return or_predict(std::get<OrdinalRegressorParams>(model.params), model.num_levels,
                              bag.instances);
        case Method::Mir: {
            const auto& p = std::get<MirParams>(model.params);
            const Eigen::VectorXd s = bag.instances * p.theta;
            std::vector<Level> out(static_cast<size_t>(bag.length()));
            for (int t = 0; t < bag.length(); ++t)
                out[static_cast<size_t>(t)] = static_cast<Level>(
                    std::clamp<long>(std::lround(s[t]), 1, model.num_levels));
            return out;
        }
        default: {
            const ChainSpec spec = chain_spec_for(model.method, model.feature_dim,
                                                  model.num_levels);
            return chain_predict(spec, view_of(model), bag).instance_labels;
        }
    }
}

std::optional<Eigen::VectorXd> bag_posterior(const TrainedModel& model, const Bag& bag) {
    switch (model.method) {
        case Method::MiDorf:
            return label_posterior(std::get<ModelParams>(model.params), bag);
        case Method::MiHcrf:
        case Method::Hcrf:
        case Method::Hcorf: {
            const ChainSpec spec = chain_spec_for(model.method, model.feature_dim,
                                                  model.num_levels);
            return chain_predict(spec, view_of(model), bag).posterior;
        }
        default:
            return std::nullopt;
    }
}

GridSelection train_with_alpha_grid(Method method, const Dataset& train,
                                    const Dataset& validation, const TrainConfig& config) {
    require_valid(train);
    require_valid(validation);
    if (config.alpha_grid.empty()) throw DataError("train_with_alpha_grid: empty grid");

    GridSelection out;
    bool have_best = false;
    double best_icc = 0.0;
    for (double alpha : config.alpha_grid) {
        TrainConfig c = config;
        c.alpha = alpha;
        TrainedModel model = train_method(method, train, c);
        std::vector<double> pred, truth;
        for (const Bag& bag : validation.bags) {
            pred.push_back(static_cast<double>(predict_bag(model, bag)));
            truth.push_back(static_cast<double>(bag.bag_label));
        }
        double icc = std::numeric_limits<double>::quiet_NaN();
        try {
            icc = icc_consistency(pred, truth);
        } catch (const MetricsError&) {
        }
        out.validation_icc.push_back(icc);
        if (std::isnan(icc)) continue;
        const bool better =
            !have_best || icc > best_icc || (icc == best_icc && alpha > out.alpha);
        if (better) {
            best_icc = icc;
            out.alpha = alpha;
            out.model = std::move(model);
            have_best = true;
        }
    }
    if (!have_best)
        throw NumericError("train_with_alpha_grid: validation ICC undefined for every grid value");
    return out;
}

}  // namespace midorf
