#pragma once

#include "labelsift/dataset.hpp"
#include "labelsift/nn/network.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace labelsift {

/// Class-probability matrix (N, C); every row is a distribution.
using PredictionMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Network configuration and training regime.
struct Hyperparams {
    nn::Architecture architecture = nn::Architecture::dense;
    std::size_t depth = 1;
    std::size_t units = 50;
    double dropout = 0.0;
    double learning_rate = 0.01;
    std::size_t max_epochs = 200;
    std::size_t batch_size = 32;
    std::size_t patience = 15;
    double min_delta = 0.005;
    std::uint64_t seed = 0;

    /// The fixed image configuration (no search).
    [[nodiscard]] static Hyperparams conv();

    friend bool operator==(const Hyperparams &, const Hyperparams &) = default;
};

/// "dense(depth=2, units=120, dropout=0.1)" or "conv(fixed)".
[[nodiscard]] std::string describe(const Hyperparams &hp);

/// Fraction of each class held out to monitor early stopping.
inline constexpr double validation_fraction = 0.1;

struct TrainingMetadata {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    /// Accuracy on the monitored split at best_epoch.
    double best_accuracy = 0.0;
    /// False when some class was too small for a validation split and
    /// training accuracy was monitored instead.
    bool used_validation_split = true;
    std::vector<double> class_weights;
    /// Mean training loss per epoch; with batch_size >= N this is the loss
    /// before each epoch's single update.
    std::vector<double> epoch_losses;
};

/// A fitted classifier. Immutable after construction; predict_proba is safe to
/// call concurrently.
class TrainedModel {
  public:
    TrainedModel(nn::ArchitectureSpec spec, nn::Network<float> network, TrainingMetadata metadata);

    [[nodiscard]] const nn::ArchitectureSpec &architecture() const noexcept { return spec_; }
    [[nodiscard]] const TrainingMetadata &metadata() const noexcept { return metadata_; }
    [[nodiscard]] const nn::Network<float> &network() const noexcept { return network_; }

    /// Class probabilities with dropout disabled. Throws data_error when the
    /// feature width does not match the input the model was built for.
    [[nodiscard]] PredictionMatrix predict_proba(const FeatureMatrix &features) const;
    [[nodiscard]] PredictionMatrix predict_proba(const Dataset &dataset) const;

  private:
    nn::ArchitectureSpec spec_;
    nn::Network<float> network_;
    TrainingMetadata metadata_;
};

/// Dense ReLU network with dropout for numerical and text data.
[[nodiscard]] TrainedModel fit_dense(const Dataset &dataset, const Hyperparams &hp);
/// Fixed convolutional network for (standardized) image data.
[[nodiscard]] TrainedModel fit_conv(const Dataset &dataset, const Hyperparams &hp);
/// Dispatches on hp.architecture.
[[nodiscard]] TrainedModel fit(const Dataset &dataset, const Hyperparams &hp);

[[nodiscard]] PredictionMatrix predict_proba(const TrainedModel &model, const FeatureMatrix &features);

/// Per-class stratified train/validation index split. Returns nullopt when a
/// class has fewer than 2 instances.
struct TrainValidationSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};
[[nodiscard]] std::optional<TrainValidationSplit> stratified_holdout(std::span<const std::size_t> labels,
                                                                    std::size_t num_classes, double fraction,
                                                                    std::uint64_t seed);

}  // namespace labelsift
