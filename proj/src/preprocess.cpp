#include "labelsift/preprocess.hpp"

#include "labelsift/errors.hpp"

#include <cctype>
#include <cmath>

namespace labelsift {

FeatureMatrix min_max_scale(const FeatureMatrix &features) {
    FeatureMatrix out(features.rows(), features.cols());
    if (features.rows() == 0) {
        return out;
    }
    for (Eigen::Index col = 0; col < features.cols(); ++col) {
        const auto column = features.col(col);
        const double lo = column.minCoeff();
        const double hi = column.maxCoeff();
        if (hi == lo) {
            out.col(col).setZero();
            continue;
        }
        const double range = hi - lo;
        for (Eigen::Index row = 0; row < features.rows(); ++row) {
            out(row, col) = (features(row, col) - lo) / range;
        }
    }
    return out;
}

FeatureMatrix standardize(const FeatureMatrix &features) {
    constexpr double min_std = 1e-8;
    FeatureMatrix out(features.rows(), features.cols());
    if (features.rows() == 0) {
        return out;
    }
    const auto n = static_cast<double>(features.rows());
    for (Eigen::Index col = 0; col < features.cols(); ++col) {
        const auto column = features.col(col);
        const double mean = column.sum() / n;
        double var = 0.0;
        for (Eigen::Index row = 0; row < features.rows(); ++row) {
            const double d = features(row, col) - mean;
            var += d * d;
        }
        double std = std::sqrt(var / n);
        if (std < min_std) {
            std = 1.0;
        }
        for (Eigen::Index row = 0; row < features.rows(); ++row) {
            out(row, col) = (features(row, col) - mean) / std;
        }
    }
    return out;
}

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_{dimension} {
    if (dimension == 0) {
        throw data_error("embedding dimension must be positive");
    }
}

void EmbeddingTable::insert(std::string token, std::vector<double> vector) {
    if (vector.size() != dimension_) {
        throw data_error("embedding for '" + token + "' has " + std::to_string(vector.size()) +
                         " components, expected " + std::to_string(dimension_));
    }
    entries_.insert_or_assign(std::move(token), Eigen::Map<const Eigen::VectorXd>(vector.data(), static_cast<Eigen::Index>(vector.size())));
}

const Eigen::VectorXd *EmbeddingTable::find(const std::string &token) const {
    const auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

Eigen::VectorXd embed_document(std::span<const std::string> tokens, const EmbeddingTable &table, std::size_t *skipped) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dimension()));
    for (const auto &token : tokens) {
        if (const auto *vec = table.find(token)) {
            sum += *vec;
        } else if (skipped != nullptr) {
            ++*skipped;
        }
    }
    return sum;
}

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char ch : line) {
        if (std::isspace(static_cast<unsigned char>(ch)) != 0) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

Dataset preprocess(const Dataset &dataset) {
    Dataset out = dataset;
    if (dataset.kind == DataKind::image) {
        out.features = standardize(dataset.features);
    } else {
        out.features = min_max_scale(dataset.features);
    }
    return out;
}

}  // namespace labelsift
