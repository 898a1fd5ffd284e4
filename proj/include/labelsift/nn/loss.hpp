#pragma once

#include "labelsift/nn/layers.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace labelsift::nn {

inline constexpr double log_epsilon = 1e-12;

/// Row-wise softmax with max-shift.
template <typename T>
[[nodiscard]] Mat<T> softmax(const Mat<T> &logits) {
    Mat<T> out(logits.rows(), logits.cols());
    for (Index r = 0; r < logits.rows(); ++r) {
        const T shift = logits.row(r).maxCoeff();
        T total{0};
        for (Index c = 0; c < logits.cols(); ++c) {
            out(r, c) = std::exp(logits(r, c) - shift);
            total += out(r, c);
        }
        out.row(r) /= total;
    }
    return out;
}

/// Softmax of a single logit vector.
[[nodiscard]] inline std::vector<double> softmax(std::span<const double> logits) {
    Mat<double> row(1, static_cast<Index>(logits.size()));
    for (std::size_t i = 0; i < logits.size(); ++i) {
        row(0, static_cast<Index>(i)) = logits[i];
    }
    const Mat<double> p = softmax(row);
    return {p.data(), p.data() + p.size()};
}

/// Mean over the batch of -w[y_n] * ln(p[n, y_n] + eps).
template <typename T>
[[nodiscard]] double weighted_cross_entropy(const Mat<T> &probs, std::span<const std::size_t> targets,
                                            std::span<const double> weights) {
    double total = 0.0;
    for (Index r = 0; r < probs.rows(); ++r) {
        const std::size_t y = targets[static_cast<std::size_t>(r)];
        total -= weights[y] * std::log(static_cast<double>(probs(r, static_cast<Index>(y))) + log_epsilon);
    }
    return total / static_cast<double>(probs.rows());
}

/// One-hot overload; targets must be one-hot rows.
template <typename T>
[[nodiscard]] double weighted_cross_entropy(const Mat<T> &probs, const Mat<T> &one_hot,
                                            std::span<const double> weights) {
    std::vector<std::size_t> targets(static_cast<std::size_t>(one_hot.rows()));
    for (Index r = 0; r < one_hot.rows(); ++r) {
        Index best = 0;
        one_hot.row(r).maxCoeff(&best);
        targets[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
    }
    return weighted_cross_entropy(probs, std::span<const std::size_t>(targets), weights);
}

/// Exact gradient of weighted_cross_entropy(softmax(logits)) with respect to the logits:
/// w * p_y / (p_y + eps) * (p - onehot(y)) / B.
template <typename T>
[[nodiscard]] Mat<T> weighted_cross_entropy_grad(const Mat<T> &probs, std::span<const std::size_t> targets,
                                                 std::span<const double> weights) {
    Mat<T> grad = probs;
    const double inv_batch = 1.0 / static_cast<double>(probs.rows());
    for (Index r = 0; r < probs.rows(); ++r) {
        const std::size_t y = targets[static_cast<std::size_t>(r)];
        const double p_y = static_cast<double>(probs(r, static_cast<Index>(y)));
        const auto scale = static_cast<T>(weights[y] * inv_batch * p_y / (p_y + log_epsilon));
        grad(r, static_cast<Index>(y)) -= T{1};
        grad.row(r) *= scale;
    }
    return grad;
}

}  // namespace labelsift::nn
