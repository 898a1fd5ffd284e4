#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace labelsift {

/// Row-major real matrix; row n holds the flattened features of instance n.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Row-major one-hot label matrix of shape (N, C), entries exactly 0 or 1.
using LabelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class DataKind { numerical, image, text };

[[nodiscard]] std::string_view to_string(DataKind kind);
/// Parses "numerical" / "image" / "text"; throws config_error otherwise.
[[nodiscard]] DataKind parse_data_kind(std::string_view name);

/// Diagnostics gathered while loading.
struct LoadStats {
    std::size_t total_tokens = 0;
    std::size_t skipped_tokens = 0;
};

/// A single-label classification dataset.
///
/// Images are stored flattened in height-width-channel order, so that
/// `sample_shape == {H, W, Ch}` and `features.cols() == H * W * Ch`.
/// Numerical and text data have `sample_shape == {D}`.
struct Dataset {
    FeatureMatrix features;
    std::vector<std::size_t> sample_shape;
    LabelMatrix labels;
    DataKind kind = DataKind::numerical;
    std::vector<std::string> class_names;
    LoadStats stats;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(features.rows()); }
    [[nodiscard]] std::size_t num_classes() const noexcept { return static_cast<std::size_t>(labels.cols()); }
    [[nodiscard]] std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

    /// Name of class `c`, falling back to its index when no names are known.
    [[nodiscard]] std::string class_name(std::size_t c) const;

    /// Checks every dataset invariant, throwing data_error on the first violation.
    void validate() const;
};

[[nodiscard]] LabelMatrix one_hot_encode(std::span<const long long> labels, std::size_t num_classes);
[[nodiscard]] LabelMatrix one_hot_encode(std::span<const std::size_t> labels, std::size_t num_classes);

/// Row-wise argmax; the inverse of one_hot_encode on valid one-hot input.
[[nodiscard]] std::vector<std::size_t> decode_labels(const LabelMatrix &labels);

/// Number of instances per class.
[[nodiscard]] std::vector<std::size_t> class_counts(const LabelMatrix &labels);

/// Balanced inverse-frequency weights w_c = N / (C * N_c).
/// Throws data_error if any class has no instance.
[[nodiscard]] std::vector<double> class_weights(const LabelMatrix &labels);

/// Copy of the selected rows, preserving order.
[[nodiscard]] Dataset subset(const Dataset &dataset, std::span<const std::size_t> rows);

/// Product of the entries of a shape.
[[nodiscard]] std::size_t shape_size(std::span<const std::size_t> shape);
/// "(a, b, c)" rendering used in messages and reports.
[[nodiscard]] std::string format_shape(std::span<const std::size_t> shape);

}  // namespace labelsift
