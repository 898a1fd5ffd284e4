#include "labelsift/evaluation.hpp"

#include "labelsift/random.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <unordered_set>

namespace labelsift {

namespace {

std::size_t intersection_size(std::span<const std::size_t> review, std::span<const std::size_t> flipped) {
    const std::unordered_set<std::size_t> truth(flipped.begin(), flipped.end());
    return static_cast<std::size_t>(
        std::count_if(review.begin(), review.end(), [&](std::size_t i) { return truth.contains(i); }));
}

std::vector<std::size_t> review_set(const SuspicionRanking &ranking) { return ranking.top_indices(ranking.suspects.size()); }

}  // namespace

double alpha_precision(std::span<const std::size_t> review, std::span<const std::size_t> flipped) {
    if (review.empty()) {
        throw config_error("alpha-precision of an empty review set is undefined");
    }
    return static_cast<double>(intersection_size(review, flipped)) / static_cast<double>(review.size());
}

std::optional<double> alpha_recall(std::span<const std::size_t> review, std::span<const std::size_t> flipped) {
    if (flipped.empty()) {
        return std::nullopt;
    }
    return static_cast<double>(intersection_size(review, flipped)) / static_cast<double>(flipped.size());
}

double alpha_precision(const SuspicionRanking &ranking, const NoiseRecord &record) {
    return alpha_precision(review_set(ranking), record.flipped_indices);
}

std::optional<double> alpha_recall(const SuspicionRanking &ranking, const NoiseRecord &record) {
    return alpha_recall(review_set(ranking), record.flipped_indices);
}

std::vector<AlphaMetrics> evaluate_prefixes(const SuspicionRanking &ranking, const NoiseRecord &record,
                                            std::span<const double> alphas) {
    std::vector<AlphaMetrics> out;
    for (const double alpha : alphas) {
        const std::size_t count = std::max<std::size_t>(1, floor_count(alpha, ranking.n));
        if (count > ranking.suspects.size()) {
            throw config_error("ranking holds fewer suspects than alpha=" + std::to_string(alpha) + " requires");
        }
        const auto review = ranking.top_indices(count);
        out.push_back({alpha, count, alpha_precision(review, record.flipped_indices),
                       alpha_recall(review, record.flipped_indices)});
    }
    return out;
}

benchmark_error::benchmark_error(const error &cause, EvalReport partial)
    : error(std::string("benchmark aborted after ") + std::to_string(partial.per_run.size()) +
            " completed run(s): " + cause.what()),
      code_{cause.code()},
      partial_{std::move(partial)} {}

EvalReport benchmark(const Dataset &dataset, double mu, std::vector<double> alphas, std::size_t runs,
                     std::uint64_t seed, const BenchmarkOptions &options) {
    const auto started = std::chrono::steady_clock::now();
    if (runs == 0) {
        throw config_error("benchmark needs at least one run");
    }
    if (alphas.empty()) {
        throw config_error("benchmark needs at least one alpha");
    }
    for (const double alpha : alphas) {
        if (!(alpha > 0.0 && alpha <= 1.0)) {
            throw config_error("alpha must lie in (0, 1], got " + std::to_string(alpha));
        }
    }
    if (!(mu > 0.0 && mu < 1.0)) {
        throw config_error("noise rate mu must lie in (0, 1), got " + std::to_string(mu));
    }
    if (options.regime == NoiseRegime::at_random && !options.groups) {
        throw config_error("the at-random regime needs class groups");
    }
    dataset.validate();

    EvalReport report;
    report.dataset_name = options.dataset_name;
    report.n = dataset.size();
    report.mu = mu;
    report.regime = options.regime;
    report.alphas = alphas;
    report.runs = runs;
    const double max_alpha = *std::max_element(alphas.begin(), alphas.end());

    auto finish = [&](EvalReport &r) {
        r.mean_precision.assign(alphas.size(), 0.0);
        r.mean_recall.assign(alphas.size(), 0.0);
        for (const auto &run : r.per_run) {
            for (std::size_t a = 0; a < alphas.size(); ++a) {
                r.mean_precision[a] += run.metrics[a].precision;
                r.mean_recall[a] += run.metrics[a].recall.value_or(0.0);
            }
        }
        for (std::size_t a = 0; a < alphas.size() && !r.per_run.empty(); ++a) {
            r.mean_precision[a] /= static_cast<double>(r.per_run.size());
            r.mean_recall[a] /= static_cast<double>(r.per_run.size());
        }
        r.total_runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    for (std::size_t run = 0; run < runs; ++run) {
        const auto run_started = std::chrono::steady_clock::now();
        RunResult result;
        result.run = run;
        result.seed = derive_seed(seed, {run});
        try {
            const auto noise_seed = derive_seed(result.seed, {0});
            auto [noisy_labels, record] =
                options.regime == NoiseRegime::at_random
                    ? flip_at_random(dataset.labels, mu, *options.groups, noise_seed)
                    : flip_completely_at_random(dataset.labels, mu, noise_seed);
            Dataset noisy = dataset;
            noisy.labels = std::move(noisy_labels);
            DetectorConfig detector = options.detector;
            detector.retain_full_scores = true;
            const auto ranking = find_mislabeled(noisy, max_alpha, derive_seed(result.seed, {1}), detector);
            result.flips = record.flipped_indices.size();
            result.hyperparams = ranking.hyperparams;
            result.metrics = evaluate_prefixes(ranking, record, alphas);
        } catch (const error &e) {
            finish(report);
            throw benchmark_error(e, std::move(report));
        }
        result.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - run_started).count();
        if (options.on_run) {
            options.on_run(result);
        }
        report.per_run.push_back(std::move(result));
    }
    finish(report);
    return report;
}

std::string format_runtime(double seconds) {
    char buffer[32];
    if (seconds < 60.0) {
        std::snprintf(buffer, sizeof(buffer), "%.1f sec", seconds);
    } else {
        std::snprintf(buffer, sizeof(buffer), "%.2f min", seconds / 60.0);
    }
    return buffer;
}

std::string render_table(const EvalReport &report) {
    std::ostringstream out;
    char cell[32];
    out << "Dataset | Runtime |";
    for (const double a : report.alphas) {
        std::snprintf(cell, sizeof(cell), " P@%.2f", a);
        out << cell;
    }
    out << " |";
    for (const double a : report.alphas) {
        std::snprintf(cell, sizeof(cell), " R@%.2f", a);
        out << cell;
    }
    out << '\n' << report.dataset_name << " | " << format_runtime(report.total_runtime_seconds) << " |";
    for (const double p : report.mean_precision) {
        std::snprintf(cell, sizeof(cell), " %6.2f", p);
        out << cell;
    }
    out << " |";
    for (const double r : report.mean_recall) {
        std::snprintf(cell, sizeof(cell), " %6.2f", r);
        out << cell;
    }
    out << '\n';
    return out.str();
}

}  // namespace labelsift
