#pragma once

#include "labelsift/dataset.hpp"

#include <cstdint>

namespace labelsift {

/// Isotropic Gaussian clusters, one per class.
struct BlobsOptions {
    std::size_t n = 4000;
    std::size_t d = 12;
    std::size_t c = 12;
    double cluster_std = 1.0;
    /// Centres are drawn uniformly from [-center_box, center_box]^d ...
    double center_box = 10.0;
    /// ... and rejected until all pairwise distances reach this many cluster_std.
    double min_separation = 10.0;
};

/// Gaussian clusters placed on hypercube vertices in an informative subspace,
/// plus redundant (linear combinations) and pure-noise features.
struct ClassificationOptions {
    std::size_t n = 10000;
    std::size_t d = 9;
    std::size_t c = 3;
    /// 0 selects max(ceil(log2(c * clusters_per_class)), d / 2).
    std::size_t informative = 0;
    /// Clamped to the features left after the informative ones.
    std::size_t redundant = 2;
    std::size_t clusters_per_class = 2;
    double class_sep = 1.0;
};

/// Throws config_error unless n >= 10 * c, c >= 2 and d >= 1 (and the centres fit).
[[nodiscard]] Dataset make_blobs(const BlobsOptions &options, std::uint64_t seed);
[[nodiscard]] Dataset make_classification(const ClassificationOptions &options, std::uint64_t seed);

}  // namespace labelsift
