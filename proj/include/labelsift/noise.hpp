#pragma once

#include "labelsift/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace labelsift {

enum class NoiseRegime { completely_at_random, at_random };

[[nodiscard]] std::string_view to_string(NoiseRegime regime);
/// Accepts "completely_at_random"/"completely-at-random" and "at_random"/"at-random".
[[nodiscard]] NoiseRegime parse_noise_regime(std::string_view name);

/// Ground truth of an injected noise pattern.
struct NoiseRecord {
    /// Sorted, distinct.
    std::vector<std::size_t> flipped_indices;
    std::vector<std::size_t> original_labels;
    std::vector<std::size_t> new_labels;
    double mu = 0.0;
    NoiseRegime regime = NoiseRegime::completely_at_random;
    std::uint64_t seed = 0;

    friend bool operator==(const NoiseRecord &, const NoiseRecord &) = default;
};

/// Partition of the class indices into disjoint groups.
class ClassGroups {
  public:
    /// Validates that the groups cover classes 0..num_classes-1 exactly once.
    ClassGroups(std::vector<std::vector<std::size_t>> groups, std::size_t num_classes);

    [[nodiscard]] const std::vector<std::vector<std::size_t>> &groups() const noexcept { return groups_; }
    [[nodiscard]] std::size_t group_of(std::size_t label) const { return group_of_.at(label); }
    /// Members of the label's group other than the label itself.
    [[nodiscard]] std::vector<std::size_t> alternatives(std::size_t label) const;

  private:
    std::vector<std::vector<std::size_t>> groups_;
    std::vector<std::size_t> group_of_;
};

/// Reads {"group": ["class name", ...], ...}; names are resolved against
/// `class_names` (or parsed as indices when a name is unknown and numeric).
[[nodiscard]] ClassGroups load_class_groups(const std::filesystem::path &path,
                                            const std::vector<std::string> &class_names);

using NoisyLabels = std::pair<LabelMatrix, NoiseRecord>;

/// Flips floor(mu * N) instances chosen uniformly without replacement to a
/// label drawn uniformly from the C - 1 other classes.
[[nodiscard]] NoisyLabels flip_completely_at_random(const LabelMatrix &labels, double mu, std::uint64_t seed);

/// Like flip_completely_at_random, but only instances whose class shares its
/// group with another class are eligible, and the new label stays inside the group.
[[nodiscard]] NoisyLabels flip_at_random(const LabelMatrix &labels, double mu, const ClassGroups &groups,
                                         std::uint64_t seed);

}  // namespace labelsift
