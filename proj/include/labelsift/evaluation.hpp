#pragma once

#include "labelsift/detector.hpp"
#include "labelsift/errors.hpp"
#include "labelsift/noise.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace labelsift {

/// |review ∩ flipped| / |review|. Both lists must hold distinct indices.
[[nodiscard]] double alpha_precision(std::span<const std::size_t> review, std::span<const std::size_t> flipped);
/// |review ∩ flipped| / |flipped|; nullopt (not applicable) when nothing was flipped.
[[nodiscard]] std::optional<double> alpha_recall(std::span<const std::size_t> review,
                                                 std::span<const std::size_t> flipped);

[[nodiscard]] double alpha_precision(const SuspicionRanking &ranking, const NoiseRecord &record);
[[nodiscard]] std::optional<double> alpha_recall(const SuspicionRanking &ranking, const NoiseRecord &record);

struct AlphaMetrics {
    double alpha = 0.0;
    std::size_t review_size = 0;
    double precision = 0.0;
    std::optional<double> recall;
};

struct RunResult {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    std::size_t flips = 0;
    Hyperparams hyperparams;
    std::vector<AlphaMetrics> metrics;
    double runtime_seconds = 0.0;
};

struct EvalReport {
    std::string dataset_name;
    std::size_t n = 0;
    double mu = 0.0;
    NoiseRegime regime = NoiseRegime::completely_at_random;
    std::vector<double> alphas;
    std::size_t runs = 0;
    std::vector<double> mean_precision;
    std::vector<double> mean_recall;
    std::vector<RunResult> per_run;
    double total_runtime_seconds = 0.0;
};

/// Evaluates every alpha on prefixes of one ranking computed at max(alphas).
[[nodiscard]] std::vector<AlphaMetrics> evaluate_prefixes(const SuspicionRanking &ranking, const NoiseRecord &record,
                                                          std::span<const double> alphas);

struct BenchmarkOptions {
    std::string dataset_name = "dataset";
    NoiseRegime regime = NoiseRegime::completely_at_random;
    /// Required for NoiseRegime::at_random.
    std::optional<ClassGroups> groups;
    DetectorConfig detector{};
    /// Called after every completed run.
    std::function<void(const RunResult &)> on_run;
};

/// A run failed; `partial()` holds the runs that completed.
class benchmark_error : public error {
  public:
    benchmark_error(const error &cause, EvalReport partial);
    [[nodiscard]] const char *code() const noexcept override { return code_; }
    [[nodiscard]] const EvalReport &partial() const noexcept { return partial_; }

  private:
    const char *code_;
    EvalReport partial_;
};

/// For each run: inject fresh noise, detect at max(alphas) and score every
/// alpha by prefix truncation. Reports per-alpha means over runs.
[[nodiscard]] EvalReport benchmark(const Dataset &dataset, double mu, std::vector<double> alphas, std::size_t runs,
                                   std::uint64_t seed, const BenchmarkOptions &options = {});

/// "37.8 sec" below a minute, "2.05 min" above.
[[nodiscard]] std::string format_runtime(double seconds);

/// Table row(s) with runtime, precision and recall columns per alpha.
[[nodiscard]] std::string render_table(const EvalReport &report);

}  // namespace labelsift
