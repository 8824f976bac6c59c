#include "midorf/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace midorf {

std::vector<double> decode_cutpoints(const ModelParams& params) {
    const int L = params.num_levels();
    std::vector<double> cuts(static_cast<size_t>(L) + 1);
    cuts.front() = -std::numeric_limits<double>::infinity();
    cuts.back() = std::numeric_limits<double>::infinity();
    double b = params.first_cut;
    cuts[1] = b;
    for (int l = 0; l < L - 2; ++l) {
        b += std::exp(params.log_gaps[l]);
        cuts[static_cast<size_t>(l) + 2] = b;
    }
    return cuts;
}

void encode_cutpoints(const std::vector<double>& interior, double& first_cut,
                      Eigen::VectorXd& log_gaps) {
    if (interior.empty()) throw std::invalid_argument("encode_cutpoints: need at least one cut");
    first_cut = interior.front();
    log_gaps.resize(static_cast<Eigen::Index>(interior.size()) - 1);
    for (size_t l = 0; l + 1 < interior.size(); ++l) {
        double gap = interior[l + 1] - interior[l];
        if (!(gap > 0.0))
            throw std::invalid_argument("encode_cutpoints: cuts must be strictly increasing");
        log_gaps[static_cast<Eigen::Index>(l)] = std::log(gap);
    }
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << issues.size() << " issue(s)";
    for (const auto& i : issues) os << "; [" << i.bag_id << "] " << i.what;
    return os.str();
}

ValidationReport validate_dataset(const Dataset& ds) {
    ValidationReport report;
    auto add = [&](const std::string& id, const std::string& what) {
        report.issues.push_back({id, what});
    };
    if (ds.scale.num_levels < 2) add("<dataset>", "num_levels must be >= 2");
    if (ds.bags.empty()) add("<dataset>", "dataset has no bags");
    const int L = ds.scale.num_levels;
    for (const auto& bag : ds.bags) {
        if (bag.length() < 1) {
            add(bag.id, "empty sequence");
            continue;
        }
        if (bag.dim() != ds.feature_dim)
            add(bag.id, "instance dimension " + std::to_string(bag.dim()) +
                            " does not match dataset feature_dim " +
                            std::to_string(ds.feature_dim));
        if (bag.bag_label < 1 || bag.bag_label > L)
            add(bag.id, "bag label " + std::to_string(bag.bag_label) + " outside 1.." +
                            std::to_string(L));
        if (!bag.instance_labels.empty()) {
            if (static_cast<int>(bag.instance_labels.size()) != bag.length())
                add(bag.id, "instance_labels length does not match sequence length");
            for (Level l : bag.instance_labels)
                if (l < 1 || l > L) {
                    add(bag.id, "instance label " + std::to_string(l) + " outside 1.." +
                                    std::to_string(L));
                    break;
                }
        }
        if (!bag.instances.allFinite()) add(bag.id, "non-finite feature value");
    }
    return report;
}

Dataset training_view(const Dataset& ds) {
    Dataset view = ds;
    for (auto& bag : view.bags) bag.instance_labels.clear();
    return view;
}

void require_valid(const Dataset& ds) {
    ValidationReport report = validate_dataset(ds);
    if (!report.ok()) throw DataError("invalid dataset: " + report.summary());
}

}  // namespace midorf
