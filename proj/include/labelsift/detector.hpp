#pragma once

#include "labelsift/dataset.hpp"
#include "labelsift/model_selection.hpp"
#include "labelsift/nn/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace labelsift {

struct Suspect {
    std::size_t index = 0;
    double score = 0.0;

    friend bool operator==(const Suspect &, const Suspect &) = default;
};

/// Instances ordered from most to least suspicious.
struct SuspicionRanking {
    std::vector<Suspect> suspects;
    double alpha = 0.0;
    std::size_t n = 0;
    /// Score of every instance, kept when requested.
    std::optional<std::vector<double>> full_scores;
    Hyperparams hyperparams;
    double runtime_seconds = 0.0;

    /// The first `count` suspects.
    [[nodiscard]] std::vector<std::size_t> top_indices(std::size_t count) const;
};

/// floor(rate * n), robust to the representation error of rates such as 0.07.
[[nodiscard]] std::size_t floor_count(double rate, std::size_t n);

/// s_n = <y_n, p_n>, the predicted probability of each instance's own label.
[[nodiscard]] std::vector<double> suspicion_scores(const LabelMatrix &labels, const PredictionMatrix &probs);

/// The floor(alpha * N) lowest scores in ascending order (ties by index).
/// When floor(alpha * N) is 0 the single lowest instance is returned with a warning.
[[nodiscard]] SuspicionRanking rank_ascending(std::span<const double> scores, double alpha);

struct DetectorConfig {
    /// Keep every instance's score; nullopt means "when N <= 100000".
    std::optional<bool> retain_full_scores;
    std::size_t threads = 1;
    SelectionOptions selection{};
    /// Skip the grid search and train this configuration directly.
    std::optional<Hyperparams> fixed_hyperparams;
    /// Called with the cross-validation results when a search ran.
    std::function<void(std::span<const CvResult>)> on_cv_results;
    /// Called with the final model when set.
    std::function<void(const TrainedModel &)> on_model;
};

/// Preprocess, select hyperparameters, train on all instances, score every
/// instance by the probability of its own label and return the lowest
/// floor(alpha * N).
[[nodiscard]] SuspicionRanking find_mislabeled(const Dataset &dataset, double alpha, std::uint64_t seed,
                                               const DetectorConfig &config = {});

}  // namespace labelsift
