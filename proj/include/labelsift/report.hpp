#pragma once

#include "labelsift/dataset.hpp"
#include "labelsift/detector.hpp"
#include "labelsift/evaluation.hpp"
#include "labelsift/noise.hpp"

#include <json.hpp>

#include <filesystem>

namespace labelsift {

[[nodiscard]] nlohmann::json to_json(const Hyperparams &hp);

/// {"alpha", "n", "selected_hyperparams", "runtime_seconds", "suspects": [{"index", "score", "original_label"}]}
/// with suspects in ranking order. original_label is the class name, or an
/// integer when the class names are plain integers.
[[nodiscard]] nlohmann::json ranking_report(const SuspicionRanking &ranking, const Dataset &dataset);

/// CSV mirror of the report suspects: index,score,original_label.
void write_ranking_csv(const SuspicionRanking &ranking, const Dataset &dataset, const std::filesystem::path &path);

/// Suspect list of a report written by ranking_report.
[[nodiscard]] SuspicionRanking ranking_from_report(const nlohmann::json &report);

[[nodiscard]] nlohmann::json to_json(const NoiseRecord &record);
[[nodiscard]] NoiseRecord noise_record_from_json(const nlohmann::json &doc);

[[nodiscard]] nlohmann::json to_json(const EvalReport &report);

/// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json &doc, const std::filesystem::path &path);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path &path);

}  // namespace labelsift
