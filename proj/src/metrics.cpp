#include "midorf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace midorf {

namespace {

void check_lengths(size_t a, size_t b) {
    if (a != b) throw MetricsError("metric inputs differ in length");
}

}  // namespace

double pearson_corr(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size());
    const size_t n = pred.size();
    if (n < 2) throw MetricsError("pearson_corr: need at least 2 points");
    double mp = 0.0, mt = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mp += pred[i];
        mt += truth[i];
    }
    mp /= static_cast<double>(n);
    mt /= static_cast<double>(n);
    double spt = 0.0, spp = 0.0, stt = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dp = pred[i] - mp, dt = truth[i] - mt;
        spt += dp * dt;
        spp += dp * dp;
        stt += dt * dt;
    }
    if (spp == 0.0 || stt == 0.0)
        throw MetricsError("pearson_corr: undefined for constant input");
    return spt / std::sqrt(spp * stt);
}

double icc_consistency(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size());
    const size_t n = pred.size();
    if (n < 2) throw MetricsError("icc: need at least 2 targets");
    // two-way ANOVA without replication, k = 2 raters
    double mu = 0.0;
    for (size_t i = 0; i < n; ++i) mu += pred[i] + truth[i];
    mu /= static_cast<double>(2 * n);
    const double m_pred_col = [&] {
        double s = 0.0;
        for (double v : pred) s += v;
        return s / static_cast<double>(n);
    }();
    const double m_truth_col = [&] {
        double s = 0.0;
        for (double v : truth) s += v;
        return s / static_cast<double>(n);
    }();
    double ss_rows = 0.0, ss_total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double row_mean = 0.5 * (pred[i] + truth[i]);
        ss_rows += 2.0 * (row_mean - mu) * (row_mean - mu);
        ss_total += (pred[i] - mu) * (pred[i] - mu) + (truth[i] - mu) * (truth[i] - mu);
    }
    const double ss_cols = static_cast<double>(n) * ((m_pred_col - mu) * (m_pred_col - mu) +
                                                     (m_truth_col - mu) * (m_truth_col - mu));
    const double ss_err = ss_total - ss_rows - ss_cols;
    const double bms = ss_rows / static_cast<double>(n - 1);
    const double ems = ss_err / static_cast<double>(n - 1);
    const double denom = bms + ems;
    if (denom <= 0.0) throw MetricsError("icc: degenerate variance");
    return (bms - ems) / denom;
}

double mean_absolute_error(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred.size(), truth.size());
    if (pred.empty()) throw MetricsError("mae: empty input");
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double accuracy(std::span<const Level> pred, std::span<const Level> truth) {
    check_lengths(pred.size(), truth.size());
    if (pred.empty()) throw MetricsError("accuracy: empty input");
    size_t hits = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double f1_macro(std::span<const Level> pred, std::span<const Level> truth, int num_levels) {
    check_lengths(pred.size(), truth.size());
    if (pred.empty()) throw MetricsError("f1_macro: empty input");
    std::vector<long> tp(static_cast<size_t>(num_levels), 0);
    std::vector<long> fp(static_cast<size_t>(num_levels), 0);
    std::vector<long> fn(static_cast<size_t>(num_levels), 0);
    for (size_t i = 0; i < pred.size(); ++i) {
        const size_t p = static_cast<size_t>(pred[i]) - 1;
        const size_t t = static_cast<size_t>(truth[i]) - 1;
        if (p == t) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    double sum = 0.0;
    int classes = 0;
    for (int c = 0; c < num_levels; ++c) {
        const size_t i = static_cast<size_t>(c);
        if (tp[i] + fp[i] + fn[i] == 0) continue;  // absent from both
        const double denom = static_cast<double>(2 * tp[i] + fp[i] + fn[i]);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[i]) / denom : 0.0;
        ++classes;
    }
    if (classes == 0) throw MetricsError("f1_macro: no classes present");
    return sum / classes;
}

MetricsReport evaluate(const std::vector<BagPrediction>& predictions, const Dataset& ds) {
    std::unordered_map<std::string, const Bag*> by_id;
    for (const Bag& bag : ds.bags) by_id[bag.id] = &bag;

    MetricsReport report;
    std::vector<double> frame_pred, frame_truth;
    std::vector<Level> seq_pred_lvl, seq_truth_lvl;
    for (const BagPrediction& p : predictions) {
        auto it = by_id.find(p.id);
        if (it == by_id.end()) throw DataError("evaluate: no bag with id '" + p.id + "'");
        const Bag& bag = *it->second;
        seq_pred_lvl.push_back(p.bag_pred);
        seq_truth_lvl.push_back(bag.bag_label);
        if (!bag.instance_labels.empty()) {
            if (p.frame_preds.size() != bag.instance_labels.size())
                throw DataError("evaluate: frame prediction length mismatch for '" + p.id + "'");
            for (size_t t = 0; t < bag.instance_labels.size(); ++t) {
                frame_pred.push_back(static_cast<double>(p.frame_preds[t]));
                frame_truth.push_back(static_cast<double>(bag.instance_labels[t]));
            }
        }
    }
    report.sequences = static_cast<long>(seq_pred_lvl.size());
    report.frames = static_cast<long>(frame_pred.size());
    if (seq_pred_lvl.empty()) throw DataError("evaluate: no predictions");

    auto guarded = [&](const char* name, auto&& fn) -> std::optional<double> {
        try {
            return fn();
        } catch (const MetricsError& e) {
            report.flags.push_back(std::string(name) + " undefined: " + e.what());
            return std::nullopt;
        }
    };

    std::vector<double> seq_pred(seq_pred_lvl.begin(), seq_pred_lvl.end());
    std::vector<double> seq_truth(seq_truth_lvl.begin(), seq_truth_lvl.end());
    report.seq_corr = guarded("sequence corr", [&] { return pearson_corr(seq_pred, seq_truth); });
    report.seq_icc = guarded("sequence icc", [&] { return icc_consistency(seq_pred, seq_truth); });
    report.seq_mae = mean_absolute_error(seq_pred, seq_truth);
    report.seq_acc = accuracy(seq_pred_lvl, seq_truth_lvl);
    report.seq_f1 = f1_macro(seq_pred_lvl, seq_truth_lvl, ds.scale.num_levels);

    if (!frame_pred.empty()) {
        report.has_frame = true;
        report.frame_corr =
            guarded("frame corr", [&] { return pearson_corr(frame_pred, frame_truth); });
        report.frame_icc =
            guarded("frame icc", [&] { return icc_consistency(frame_pred, frame_truth); });
        report.frame_mae = mean_absolute_error(frame_pred, frame_truth);
    } else {
        report.flags.push_back("frame metrics omitted: no instance labels in dataset");
    }
    return report;
}

}  // namespace midorf
