#include "labelsift/detector.hpp"

#include "labelsift/errors.hpp"
#include "labelsift/log.hpp"
#include "labelsift/preprocess.hpp"
#include "labelsift/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace labelsift {

std::vector<std::size_t> SuspicionRanking::top_indices(std::size_t count) const {
    count = std::min(count, suspects.size());
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = suspects[i].index;
    }
    return out;
}

std::size_t floor_count(double rate, std::size_t n) {
    return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

std::vector<double> suspicion_scores(const LabelMatrix &labels, const PredictionMatrix &probs) {
    if (labels.rows() != probs.rows() || labels.cols() != probs.cols()) {
        throw data_error("label matrix (" + std::to_string(labels.rows()) + ", " + std::to_string(labels.cols()) +
                         ") and prediction matrix (" + std::to_string(probs.rows()) + ", " +
                         std::to_string(probs.cols()) + ") differ in shape");
    }
    std::vector<double> scores(static_cast<std::size_t>(labels.rows()));
    for (Eigen::Index r = 0; r < labels.rows(); ++r) {
        scores[static_cast<std::size_t>(r)] = labels.row(r).dot(probs.row(r));
    }
    return scores;
}

SuspicionRanking rank_ascending(std::span<const double> scores, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw config_error("alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    SuspicionRanking ranking;
    ranking.alpha = alpha;
    ranking.n = scores.size();
    if (scores.empty()) {
        return ranking;
    }
    std::size_t count = floor_count(alpha, scores.size());
    if (count == 0) {
        log_warning("alpha * N < 1; returning the single most suspicious instance");
        count = 1;
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) { return scores[a] < scores[b] || (scores[a] == scores[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), less);
    ranking.suspects.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ranking.suspects.push_back({order[i], scores[order[i]]});
    }
    return ranking;
}

SuspicionRanking find_mislabeled(const Dataset &dataset, double alpha, std::uint64_t seed,
                                 const DetectorConfig &config) {
    const auto started = std::chrono::steady_clock::now();
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw config_error("alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
    dataset.validate();
    const Dataset prepared = preprocess(dataset);

    Hyperparams hp;
    if (config.fixed_hyperparams) {
        hp = *config.fixed_hyperparams;
        hp.seed = derive_seed(seed, {2});
    } else {
        SelectionOptions options = config.selection;
        options.threads = config.threads;
        auto selection = select_hyperparameters(prepared, derive_seed(seed, {1}), options);
        if (config.on_cv_results && !selection.results.empty()) {
            config.on_cv_results(selection.results);
        }
        hp = selection.best;
        hp.seed = derive_seed(seed, {2});
    }

    TrainedModel model = fit(prepared, hp);
    const auto probs = model.predict_proba(prepared.features);
    auto scores = suspicion_scores(prepared.labels, probs);

    SuspicionRanking ranking = rank_ascending(scores, alpha);
    ranking.hyperparams = hp;
    const bool retain = config.retain_full_scores.value_or(dataset.size() <= 100000);
    if (retain) {
        ranking.full_scores = std::move(scores);
    }
    if (config.on_model) {
        config.on_model(model);
    }
    ranking.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return ranking;
}

}  // namespace labelsift
