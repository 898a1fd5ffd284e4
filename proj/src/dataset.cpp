#include "labelsift/dataset.hpp"

#include "labelsift/errors.hpp"

#include <cmath>
#include <numeric>

namespace labelsift {

std::string_view to_string(DataKind kind) {
    switch (kind) {
        case DataKind::numerical: return "numerical";
        case DataKind::image: return "image";
        case DataKind::text: return "text";
    }
    return "unknown";
}

DataKind parse_data_kind(std::string_view name) {
    if (name == "numerical") {
        return DataKind::numerical;
    }
    if (name == "image") {
        return DataKind::image;
    }
    if (name == "text") {
        return DataKind::text;
    }
    throw config_error("unknown dataset kind '" + std::string{name} + "' (expected numerical, image or text)");
}

std::string Dataset::class_name(std::size_t c) const {
    if (c < class_names.size()) {
        return class_names[c];
    }
    return std::to_string(c);
}

void Dataset::validate() const {
    const std::size_t n = size();
    const std::size_t c = num_classes();
    if (static_cast<std::size_t>(labels.rows()) != n) {
        throw data_error("feature rows (" + std::to_string(n) + ") and label rows (" + std::to_string(labels.rows()) +
                         ") differ");
    }
    if (c < 2) {
        throw data_error("a classification dataset needs at least 2 classes, got " + std::to_string(c));
    }
    if (n < c) {
        throw data_error("dataset has fewer instances (" + std::to_string(n) + ") than classes (" + std::to_string(c) +
                         ")");
    }
    if (shape_size(sample_shape) != feature_dim()) {
        throw data_error("sample shape " + format_shape(sample_shape) + " does not match " +
                         std::to_string(feature_dim()) + " feature columns");
    }
    if (kind == DataKind::image) {
        if (sample_shape.size() != 3) {
            throw data_error("image datasets need a (H, W, Ch) sample shape, got " + format_shape(sample_shape));
        }
        if (sample_shape[2] != 1 && sample_shape[2] != 3) {
            throw data_error("image channel count must be 1 or 3, got " + std::to_string(sample_shape[2]));
        }
    } else if (sample_shape.size() != 1) {
        throw data_error("tabular and text datasets need a (D) sample shape, got " + format_shape(sample_shape));
    }
    if (!class_names.empty() && class_names.size() != c) {
        throw data_error("class name count does not match the label width");
    }
    for (Eigen::Index row = 0; row < labels.rows(); ++row) {
        int ones = 0;
        for (Eigen::Index col = 0; col < labels.cols(); ++col) {
            const double v = labels(row, col);
            if (v == 1.0) {
                ++ones;
            } else if (v != 0.0) {
                throw data_error("label row " + std::to_string(row) + " is not one-hot");
            }
        }
        if (ones != 1) {
            throw data_error("label row " + std::to_string(row) + " is not one-hot");
        }
    }
    if (!features.allFinite()) {
        for (Eigen::Index row = 0; row < features.rows(); ++row) {
            if (!features.row(row).allFinite()) {
                throw data_error("non-finite feature value in row " + std::to_string(row));
            }
        }
    }
}

namespace {

template <typename Index>
LabelMatrix one_hot_impl(std::span<const Index> labels, std::size_t num_classes) {
    LabelMatrix out = LabelMatrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(num_classes));
    for (std::size_t row = 0; row < labels.size(); ++row) {
        const auto label = static_cast<long long>(labels[row]);
        if (label < 0 || static_cast<unsigned long long>(label) >= num_classes) {
            throw invalid_label_error(row, label, num_classes);
        }
        out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(label)) = 1.0;
    }
    return out;
}

}  // namespace

LabelMatrix one_hot_encode(std::span<const long long> labels, std::size_t num_classes) {
    return one_hot_impl(labels, num_classes);
}

LabelMatrix one_hot_encode(std::span<const std::size_t> labels, std::size_t num_classes) {
    return one_hot_impl(labels, num_classes);
}

std::vector<std::size_t> decode_labels(const LabelMatrix &labels) {
    std::vector<std::size_t> out(static_cast<std::size_t>(labels.rows()));
    for (Eigen::Index row = 0; row < labels.rows(); ++row) {
        Eigen::Index best = 0;
        labels.row(row).maxCoeff(&best);
        out[static_cast<std::size_t>(row)] = static_cast<std::size_t>(best);
    }
    return out;
}

std::vector<std::size_t> class_counts(const LabelMatrix &labels) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(labels.cols()), 0);
    for (const std::size_t c : decode_labels(labels)) {
        ++counts[c];
    }
    return counts;
}

std::vector<double> class_weights(const LabelMatrix &labels) {
    const auto counts = class_counts(labels);
    const auto n = static_cast<double>(labels.rows());
    const auto c = static_cast<double>(counts.size());
    std::vector<double> weights(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] == 0) {
            throw data_error("class " + std::to_string(k) +
                             " has no instances; drop the class from the label set before running");
        }
        weights[k] = n / (c * static_cast<double>(counts[k]));
    }
    return weights;
}

Dataset subset(const Dataset &dataset, std::span<const std::size_t> rows) {
    Dataset out;
    out.kind = dataset.kind;
    out.sample_shape = dataset.sample_shape;
    out.class_names = dataset.class_names;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), dataset.features.cols());
    out.labels.resize(static_cast<Eigen::Index>(rows.size()), dataset.labels.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(rows[i]);
        out.features.row(static_cast<Eigen::Index>(i)) = dataset.features.row(src);
        out.labels.row(static_cast<Eigen::Index>(i)) = dataset.labels.row(src);
    }
    return out;
}

std::size_t shape_size(std::span<const std::size_t> shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string format_shape(std::span<const std::size_t> shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) {
            out += ", ";
        }
        out += std::to_string(shape[i]);
    }
    return out + ")";
}

}  // namespace labelsift
