#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "midorf/chain_family.hpp"
#include "midorf/learning.hpp"
#include "midorf/model.hpp"

namespace midorf {

enum class Method { MiDorf, SilOr, MiOr, Mir, MiHcrf, Hcrf, Hcorf };

std::string to_string(Method method);
Method method_from_string(const std::string& name);
const std::vector<Method>& all_methods();

// Static ordinal probit regressor (shared by SIL-OR and MI-OR).
struct OrdinalRegressorParams {
    Eigen::VectorXd beta;
    double first_cut = 0.0;
    Eigen::VectorXd log_gaps;  // L-2
};

// Linear scorer with a smooth-max (log-sum-exp) bag aggregate.
struct MirParams {
    Eigen::VectorXd theta;
    double gamma = 1.0;
};

struct MiHcrfParams {
    Eigen::MatrixXd node_weights;  // L x d multinomial projections
    Eigen::MatrixXd transition;    // L x L
    double card_weight = 0.0;
};

struct HcrfParams {
    Eigen::MatrixXd node_weights;
    Eigen::MatrixXd transition;
    Eigen::MatrixXd label_compat;  // L x L, (level, label)
};

struct HcorfParams {
    Eigen::VectorXd beta;
    double first_cut = 0.0;
    Eigen::VectorXd log_gaps;
    Eigen::MatrixXd transition;
    Eigen::MatrixXd label_compat;
};

using MethodParams = std::variant<ModelParams, OrdinalRegressorParams, MirParams, MiHcrfParams,
                                  HcrfParams, HcorfParams>;

// Every method behind the same train/predict surface.
struct TrainedModel {
    Method method = Method::MiDorf;
    int num_levels = 2;
    int feature_dim = 0;
    MethodParams params;
    TrainTrace trace;
};

TrainedModel train_method(Method method, const Dataset& ds, const TrainConfig& config);

Level predict_bag(const TrainedModel& model, const Bag& bag);
std::vector<Level> predict_instances(const TrainedModel& model, const Bag& bag);
// Label posterior for the probabilistic (chain) methods, nullopt otherwise.
std::optional<Eigen::VectorXd> bag_posterior(const TrainedModel& model, const Bag& bag);

struct GridSelection {
    TrainedModel model;
    double alpha = 0.0;
    std::vector<double> validation_icc;
};

// Alpha grid selection on validation sequence-level ICC (ties to larger
// alpha), uniformly over all methods.
GridSelection train_with_alpha_grid(Method method, const Dataset& train,
                                    const Dataset& validation, const TrainConfig& config);

// Chain spec used by the latent-chain methods (exposed for gradient checks).
ChainSpec chain_spec_for(Method method, int feature_dim, int num_levels);

// Smooth-max aggregate of MIR for one bag: (1/gamma) log sum_t exp(gamma s_t).
double mir_aggregate(const MirParams& params, const Eigen::MatrixXd& instances);

// One correction step of the MI-OR label loop: clamps labels above y down to
// y and, when every prediction is below y, raises the maximal ones to y.
std::vector<Level> mi_or_correct(const std::vector<Level>& predictions, Level bag_label);

}  // namespace midorf
