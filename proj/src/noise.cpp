#include "labelsift/noise.hpp"

#include "labelsift/detector.hpp"
#include "labelsift/errors.hpp"
#include "labelsift/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <numeric>

namespace labelsift {

std::string_view to_string(NoiseRegime regime) {
    return regime == NoiseRegime::at_random ? "at_random" : "completely_at_random";
}

NoiseRegime parse_noise_regime(std::string_view name) {
    if (name == "completely_at_random" || name == "completely-at-random") {
        return NoiseRegime::completely_at_random;
    }
    if (name == "at_random" || name == "at-random") {
        return NoiseRegime::at_random;
    }
    throw config_error("unknown noise regime '" + std::string{name} + "' (expected completely-at-random or at-random)");
}

ClassGroups::ClassGroups(std::vector<std::vector<std::size_t>> groups, std::size_t num_classes)
    : groups_{std::move(groups)}, group_of_(num_classes, num_classes) {
    for (std::size_t g = 0; g < groups_.size(); ++g) {
        for (const auto label : groups_[g]) {
            if (label >= num_classes) {
                throw config_error("class group refers to class " + std::to_string(label) + " but only " +
                                   std::to_string(num_classes) + " classes exist");
            }
            if (group_of_[label] != num_classes) {
                throw config_error("class " + std::to_string(label) + " appears in more than one group");
            }
            group_of_[label] = g;
        }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (group_of_[c] == num_classes) {
            throw config_error("class " + std::to_string(c) + " is not assigned to any group");
        }
    }
}

std::vector<std::size_t> ClassGroups::alternatives(std::size_t label) const {
    std::vector<std::size_t> out;
    for (const auto other : groups_[group_of(label)]) {
        if (other != label) {
            out.push_back(other);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ClassGroups load_class_groups(const std::filesystem::path &path, const std::vector<std::string> &class_names) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("cannot open groups file '" + path.string() + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw config_error("groups file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) {
        throw config_error("groups file must hold an object {group: [class names]}");
    }
    std::vector<std::vector<std::size_t>> groups;
    for (const auto &[group, members] : doc.items()) {
        if (!members.is_array()) {
            throw config_error("group '" + group + "' must be an array of class names");
        }
        auto &resolved = groups.emplace_back();
        for (const auto &member : members) {
            std::string name = member.is_string() ? member.get<std::string>() : member.dump();
            const auto it = std::find(class_names.begin(), class_names.end(), name);
            if (it != class_names.end()) {
                resolved.push_back(static_cast<std::size_t>(it - class_names.begin()));
                continue;
            }
            std::size_t index = 0;
            const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), index);
            if (ec != std::errc{} || ptr != name.data() + name.size()) {
                throw config_error("group '" + group + "' names unknown class '" + name + "'");
            }
            resolved.push_back(index);
        }
    }
    return {std::move(groups), class_names.size()};
}

namespace {

NoisyLabels flip_from(const LabelMatrix &labels, double mu, std::uint64_t seed, NoiseRegime regime,
                      std::vector<std::size_t> eligible,
                      const std::function<std::vector<std::size_t>(std::size_t)> &alternatives) {
    if (!(mu > 0.0 && mu < 1.0)) {
        throw config_error("noise rate mu must lie in (0, 1), got " + std::to_string(mu));
    }
    if (labels.cols() < 2) {
        throw config_error("label noise needs at least 2 classes");
    }
    const auto n = static_cast<std::size_t>(labels.rows());
    const std::size_t flips = floor_count(mu, n);
    if (flips == 0) {
        throw config_error("mu * N rounds down to 0 flips (mu=" + std::to_string(mu) + ", N=" + std::to_string(n) +
                           "); use a larger mu or dataset");
    }
    if (eligible.empty()) {
        throw config_error("no instance is eligible for flipping (every class sits in a singleton group)");
    }
    if (eligible.size() < flips) {
        throw config_error("only " + std::to_string(eligible.size()) + " instances are eligible for flipping but " +
                           std::to_string(flips) + " flips were requested");
    }

    Rng rng(seed);
    // partial Fisher-Yates: the first `flips` slots are a uniform sample without replacement
    for (std::size_t i = 0; i < flips; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, eligible.size() - i));
        std::swap(eligible[i], eligible[j]);
    }
    std::vector<std::size_t> chosen(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(flips));
    std::sort(chosen.begin(), chosen.end());

    const auto current = decode_labels(labels);
    NoiseRecord record;
    record.mu = mu;
    record.regime = regime;
    record.seed = seed;
    LabelMatrix noisy = labels;
    for (const auto index : chosen) {
        const auto original = current[index];
        const auto options = alternatives(original);
        const auto replacement = options[static_cast<std::size_t>(uniform_below(rng, options.size()))];
        noisy.row(static_cast<Eigen::Index>(index)).setZero();
        noisy(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(replacement)) = 1.0;
        record.flipped_indices.push_back(index);
        record.original_labels.push_back(original);
        record.new_labels.push_back(replacement);
    }
    return {std::move(noisy), std::move(record)};
}

}  // namespace

NoisyLabels flip_completely_at_random(const LabelMatrix &labels, double mu, std::uint64_t seed) {
    std::vector<std::size_t> eligible(static_cast<std::size_t>(labels.rows()));
    std::iota(eligible.begin(), eligible.end(), std::size_t{0});
    const auto num_classes = static_cast<std::size_t>(labels.cols());
    return flip_from(labels, mu, seed, NoiseRegime::completely_at_random, std::move(eligible),
                     [num_classes](std::size_t label) {
                         std::vector<std::size_t> out;
                         for (std::size_t c = 0; c < num_classes; ++c) {
                             if (c != label) {
                                 out.push_back(c);
                             }
                         }
                         return out;
                     });
}

NoisyLabels flip_at_random(const LabelMatrix &labels, double mu, const ClassGroups &groups, std::uint64_t seed) {
    const auto current = decode_labels(labels);
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < current.size(); ++i) {
        if (!groups.alternatives(current[i]).empty()) {
            eligible.push_back(i);
        }
    }
    return flip_from(labels, mu, seed, NoiseRegime::at_random, std::move(eligible),
                     [&groups](std::size_t label) { return groups.alternatives(label); });
}

}  // namespace labelsift
