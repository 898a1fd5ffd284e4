#include "labelsift/synthetic.hpp"

#include "labelsift/errors.hpp"
#include "labelsift/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace labelsift {

namespace {

/// Box-Muller standard normal; one value per call keeps the stream simple.
double standard_normal(Rng &rng) {
    const double u1 = 1.0 - uniform_unit(rng);  // (0, 1]
    const double u2 = uniform_unit(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void check_common(std::size_t n, std::size_t d, std::size_t c) {
    if (c < 2) {
        throw config_error("synthetic data needs at least 2 classes");
    }
    if (d == 0) {
        throw config_error("synthetic data needs at least 1 feature");
    }
    if (n < 10 * c) {
        throw config_error("synthetic data needs n >= 10 * c (n=" + std::to_string(n) + ", c=" + std::to_string(c) + ")");
    }
}

/// Shuffles rows and one-hot encodes labels.
Dataset finish(FeatureMatrix features, std::vector<std::size_t> labels, std::size_t c, Rng &rng) {
    const std::size_t n = labels.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    Dataset dataset;
    dataset.kind = DataKind::numerical;
    dataset.sample_shape = {static_cast<std::size_t>(features.cols())};
    dataset.features.resize(features.rows(), features.cols());
    std::vector<std::size_t> shuffled(n);
    for (std::size_t i = 0; i < n; ++i) {
        dataset.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(order[i]));
        shuffled[i] = labels[order[i]];
    }
    dataset.labels = one_hot_encode(std::span<const std::size_t>(shuffled), c);
    for (std::size_t k = 0; k < c; ++k) {
        dataset.class_names.push_back(std::to_string(k));
    }
    return dataset;
}

}  // namespace

Dataset make_blobs(const BlobsOptions &options, std::uint64_t seed) {
    check_common(options.n, options.d, options.c);
    if (!(options.cluster_std > 0.0) || !(options.center_box > 0.0)) {
        throw config_error("cluster_std and center_box must be positive");
    }
    Rng rng(seed);
    const auto d = static_cast<Eigen::Index>(options.d);
    const double min_distance = options.min_separation * options.cluster_std;
    std::vector<Eigen::VectorXd> centers;
    constexpr int max_attempts = 100000;
    int attempts = 0;
    while (centers.size() < options.c) {
        if (++attempts > max_attempts) {
            throw config_error("cannot place " + std::to_string(options.c) + " blob centres " +
                               std::to_string(min_distance) + " apart inside the centre box");
        }
        Eigen::VectorXd candidate(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            candidate(j) = (2.0 * uniform_unit(rng) - 1.0) * options.center_box;
        }
        bool far = true;
        for (const auto &c : centers) {
            far = far && (c - candidate).norm() >= min_distance;
        }
        if (far) {
            centers.push_back(std::move(candidate));
        }
    }

    FeatureMatrix features(static_cast<Eigen::Index>(options.n), d);
    std::vector<std::size_t> labels(options.n);
    for (std::size_t i = 0; i < options.n; ++i) {
        const std::size_t k = i % options.c;
        labels[i] = k;
        for (Eigen::Index j = 0; j < d; ++j) {
            features(static_cast<Eigen::Index>(i), j) = centers[k](j) + options.cluster_std * standard_normal(rng);
        }
    }
    return finish(std::move(features), std::move(labels), options.c, rng);
}

Dataset make_classification(const ClassificationOptions &options, std::uint64_t seed) {
    check_common(options.n, options.d, options.c);
    if (options.clusters_per_class == 0) {
        throw config_error("clusters_per_class must be at least 1");
    }
    const std::size_t clusters = options.c * options.clusters_per_class;
    std::size_t informative = options.informative;
    if (informative == 0) {
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < clusters) {
            ++bits;
        }
        informative = std::max<std::size_t>({bits, options.d / 2, 1});
    }
    if (informative > options.d) {
        throw config_error("informative features (" + std::to_string(informative) + ") exceed d=" +
                           std::to_string(options.d));
    }
    if (informative < 63 && (std::size_t{1} << informative) < clusters) {
        throw config_error("c * clusters_per_class = " + std::to_string(clusters) + " exceeds the 2^" +
                           std::to_string(informative) + " hypercube vertices");
    }
    const std::size_t redundant = std::min(options.redundant, options.d - informative);

    Rng rng(seed);
    const auto inf = static_cast<Eigen::Index>(informative);
    // distinct hypercube vertices as cluster centroids
    std::set<std::uint64_t> used;
    std::vector<Eigen::VectorXd> centroids;
    while (centroids.size() < clusters) {
        std::uint64_t vertex = 0;
        Eigen::VectorXd centroid(inf);
        for (Eigen::Index j = 0; j < inf; ++j) {
            const bool bit = (rng() >> 63U) != 0;
            if (j < 64) {
                vertex |= static_cast<std::uint64_t>(bit) << static_cast<unsigned>(j);
            }
            centroid(j) = bit ? options.class_sep : -options.class_sep;
        }
        if (informative > 64 || used.insert(vertex).second) {
            centroids.push_back(std::move(centroid));
        }
    }

    FeatureMatrix features = FeatureMatrix::Zero(static_cast<Eigen::Index>(options.n), static_cast<Eigen::Index>(options.d));
    std::vector<std::size_t> labels(options.n);
    std::vector<std::size_t> cluster_of(options.n);
    for (std::size_t i = 0; i < options.n; ++i) {
        cluster_of[i] = i % clusters;
        labels[i] = cluster_of[i] % options.c;
    }
    for (std::size_t k = 0; k < clusters; ++k) {
        Eigen::MatrixXd mixing(inf, inf);
        for (Eigen::Index a = 0; a < inf; ++a) {
            for (Eigen::Index b = 0; b < inf; ++b) {
                mixing(a, b) = 2.0 * uniform_unit(rng) - 1.0;
            }
        }
        for (std::size_t i = k; i < options.n; i += clusters) {
            Eigen::RowVectorXd z(inf);
            for (Eigen::Index j = 0; j < inf; ++j) {
                z(j) = standard_normal(rng);
            }
            features.row(static_cast<Eigen::Index>(i)).head(inf) = z * mixing + centroids[k].transpose();
        }
    }
    if (redundant > 0) {
        Eigen::MatrixXd combine(inf, static_cast<Eigen::Index>(redundant));
        for (Eigen::Index a = 0; a < combine.size(); ++a) {
            combine.data()[a] = 2.0 * uniform_unit(rng) - 1.0;
        }
        features.middleCols(inf, static_cast<Eigen::Index>(redundant)) = features.leftCols(inf) * combine;
    }
    for (auto j = static_cast<Eigen::Index>(informative + redundant); j < features.cols(); ++j) {
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            features(i, j) = standard_normal(rng);
        }
    }
    return finish(std::move(features), std::move(labels), options.c, rng);
}

}  // namespace labelsift
