#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "midorf/baselines.hpp"
#include "midorf/metrics.hpp"
#include "midorf/model.hpp"

namespace midorf {

// File formats carry 0-based ordinal labels; the +1 offset to the internal
// 1..L levels is applied here and nowhere else.

// One JSON object per line:
//   {"id": str, "label": int, "instances": [[d reals]...],
//    "instance_labels": [int...]?}
// num_levels, when absent, is inferred as 1 + the largest label seen.
Dataset load_dataset_jsonl(const std::filesystem::path& path,
                           std::optional<int> num_levels = std::nullopt);
void save_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path);

struct TrainMeta {
    std::uint64_t seed = 0;
    double alpha = 0.0;
    int iterations = 0;
};

// Single-document JSON model file ({"format_version": 1, "method", "scale",
// "feature_dim", "params", "train_meta"}); floats round-trip exactly.
void save_model(const TrainedModel& model, const TrainMeta& meta,
                const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path, TrainMeta* meta = nullptr);

// Prediction JSONL: {"id", "bag_pred", "frame_preds", "bag_posterior"?}.
void save_predictions(const std::vector<BagPrediction>& predictions,
                      const std::filesystem::path& path, bool with_frames = true,
                      bool with_bags = true);
std::vector<BagPrediction> load_predictions(const std::filesystem::path& path);

std::string report_to_json(const MetricsReport& report);
std::string report_table(const MetricsReport& report);

}  // namespace midorf
