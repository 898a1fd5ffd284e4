#pragma once

#include "labelsift/dataset.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace labelsift {

/// Column-wise rescaling to [0, 1]. Constant columns become all zeros.
[[nodiscard]] FeatureMatrix min_max_scale(const FeatureMatrix &features);

/// Column-wise zero mean and unit (population) standard deviation.
/// Columns whose std is below 1e-8 are only centred.
[[nodiscard]] FeatureMatrix standardize(const FeatureMatrix &features);

/// Token -> dense vector lookup, all vectors of the same length.
class EmbeddingTable {
  public:
    explicit EmbeddingTable(std::size_t dimension);

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

    /// Inserts or replaces a vector; throws data_error on a length mismatch.
    void insert(std::string token, std::vector<double> vector);
    /// nullptr when the token is unknown.
    [[nodiscard]] const Eigen::VectorXd *find(const std::string &token) const;

  private:
    std::size_t dimension_;
    std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

/// Sum of the embeddings of all known tokens. Unknown tokens are skipped and
/// counted in `skipped` when given.
[[nodiscard]] Eigen::VectorXd embed_document(std::span<const std::string> tokens, const EmbeddingTable &table,
                                             std::size_t *skipped = nullptr);

/// Lowercases and splits on whitespace.
[[nodiscard]] std::vector<std::string> tokenize(std::string_view line);

/// Applies the preprocessing the detector uses for each data kind:
/// min-max scaling for numerical and text features, standardization for images.
[[nodiscard]] Dataset preprocess(const Dataset &dataset);

}  // namespace labelsift
