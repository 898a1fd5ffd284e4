#pragma once

#include "labelsift/dataset.hpp"
#include "labelsift/nn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace labelsift {

/// One cell of the dense search grid.
struct GridPoint {
    std::size_t depth = 1;
    std::size_t units = 50;
    double dropout = 0.0;

    friend bool operator==(const GridPoint &, const GridPoint &) = default;
};

/// Hidden-layer counts, widths and dropout rates searched for dense networks.
inline constexpr std::size_t grid_depths[] = {1, 2, 3, 5};
inline constexpr std::size_t grid_units[] = {50, 120};
inline constexpr double grid_dropouts[] = {0.0, 0.1, 0.2};

/// Dense grid in depth-major, then units, then dropout order (24 points) for
/// numerical and text data; empty for images, which use Hyperparams::conv().
[[nodiscard]] std::vector<GridPoint> hyperparameter_grid(DataKind kind);

/// k disjoint folds covering 0..N-1. Stratified by class when every class has
/// at least k members, otherwise a plain shuffled split (with a warning).
/// Throws config_error when N < k or k < 2.
[[nodiscard]] std::vector<std::vector<std::size_t>> stratified_kfold(const LabelMatrix &labels, std::size_t k,
                                                                     std::uint64_t seed);

/// Macro-averaged F1 over the classes that occur in either label list.
/// A class with zero precision and recall contributes 0.
[[nodiscard]] double balanced_f_score(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                      std::size_t num_classes);

struct CvResult {
    std::size_t point_id = 0;
    GridPoint point;
    std::vector<double> fold_scores;
    double mean_score = 0.0;
    /// Set when some fold failed to train (its score counts as 0).
    bool failed = false;
};

/// Index of the best result: highest mean score; ties go to the smaller model
/// (smaller depth, then fewer units, then higher dropout), then grid order.
[[nodiscard]] std::size_t pick_best(std::span<const CvResult> results);

struct SelectionOptions {
    std::size_t folds = 3;
    /// Epoch cap for the cross-validation fits.
    std::size_t cv_max_epochs = 50;
    /// Training regime shared by every fit (architecture fields are ignored).
    Hyperparams base{};
    std::size_t threads = 1;
};

struct SelectionResult {
    Hyperparams best;
    std::vector<CvResult> results;
    std::size_t training_runs = 0;
};

/// Cross-validated grid search for dense networks; returns the fixed conv
/// configuration immediately for image data.
[[nodiscard]] SelectionResult select_hyperparameters(const Dataset &dataset, std::uint64_t seed,
                                                     const SelectionOptions &options = {});

/// CSV with columns point_id,depth,units,dropout,fold,f_score,mean_f_score.
void write_cv_trace(std::span<const CvResult> results, const std::filesystem::path &path);

}  // namespace labelsift
