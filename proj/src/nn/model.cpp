#include "labelsift/nn/model.hpp"

#include "labelsift/errors.hpp"
#include "labelsift/log.hpp"
#include "labelsift/nn/loss.hpp"
#include "labelsift/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace labelsift {

using nn::Mat;

Hyperparams Hyperparams::conv() {
    Hyperparams hp;
    hp.architecture = nn::Architecture::conv;
    hp.depth = 0;
    hp.units = 0;
    hp.dropout = 0.0;
    return hp;
}

std::string describe(const Hyperparams &hp) {
    if (hp.architecture == nn::Architecture::conv) {
        return "conv(fixed)";
    }
    std::ostringstream out;
    out << "dense(depth=" << hp.depth << ", units=" << hp.units << ", dropout=" << hp.dropout << ")";
    return out.str();
}

TrainedModel::TrainedModel(nn::ArchitectureSpec spec, nn::Network<float> network, TrainingMetadata metadata)
    : spec_{std::move(spec)}, network_{std::move(network)}, metadata_{std::move(metadata)} {}

PredictionMatrix TrainedModel::predict_proba(const FeatureMatrix &features) const {
    const auto expected = static_cast<Eigen::Index>(shape_size(spec_.input_shape));
    if (features.cols() != expected) {
        throw data_error("feature shape mismatch: model expects (N, " + std::to_string(expected) + ") i.e. samples of " +
                         format_shape(spec_.input_shape) + ", got (" + std::to_string(features.rows()) + ", " +
                         std::to_string(features.cols()) + ")");
    }
    constexpr Eigen::Index chunk = 256;
    PredictionMatrix out(features.rows(), static_cast<Eigen::Index>(spec_.num_classes));
    for (Eigen::Index start = 0; start < features.rows(); start += chunk) {
        const Eigen::Index rows = std::min(chunk, features.rows() - start);
        const Mat<float> batch = features.middleRows(start, rows).cast<float>();
        const Mat<double> logits = network_.infer(batch).cast<double>();
        out.middleRows(start, rows) = nn::softmax(logits);
    }
    return out;
}

PredictionMatrix TrainedModel::predict_proba(const Dataset &dataset) const {
    if (dataset.sample_shape != spec_.input_shape) {
        throw data_error("feature shape mismatch: model expects samples of " + format_shape(spec_.input_shape) +
                         ", got " + format_shape(dataset.sample_shape));
    }
    return predict_proba(dataset.features);
}

PredictionMatrix predict_proba(const TrainedModel &model, const FeatureMatrix &features) {
    return model.predict_proba(features);
}

std::optional<TrainValidationSplit> stratified_holdout(std::span<const std::size_t> labels, std::size_t num_classes,
                                                       double fraction, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[labels[i]].push_back(i);
    }
    Rng rng(seed);
    TrainValidationSplit split;
    for (auto &members : by_class) {
        if (members.empty()) {
            continue;
        }
        if (members.size() < 2) {
            return std::nullopt;
        }
        shuffle(members.begin(), members.end(), rng);
        auto held = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(members.size())));
        held = std::clamp<std::size_t>(held, 1, members.size() - 1);
        split.validation.insert(split.validation.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(held));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(held), members.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

namespace {

void check_hyperparams(const Hyperparams &hp) {
    if (hp.max_epochs == 0) {
        throw config_error("max_epochs must be at least 1");
    }
    if (hp.batch_size == 0) {
        throw config_error("batch_size must be at least 1");
    }
    if (!(hp.learning_rate > 0.0) || !std::isfinite(hp.learning_rate)) {
        throw config_error("learning rate must be positive");
    }
    if (!(hp.dropout >= 0.0 && hp.dropout < 1.0)) {
        throw config_error("dropout must lie in [0, 1)");
    }
}

Mat<float> gather_rows(const Mat<float> &x, std::span<const std::size_t> rows) {
    Mat<float> out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

double accuracy(const nn::Network<float> &net, const Mat<float> &x, std::span<const std::size_t> labels) {
    constexpr Eigen::Index chunk = 256;
    std::size_t correct = 0;
    for (Eigen::Index start = 0; start < x.rows(); start += chunk) {
        const Eigen::Index rows = std::min(chunk, x.rows() - start);
        const Mat<float> logits = net.infer(x.middleRows(start, rows));
        for (Eigen::Index r = 0; r < rows; ++r) {
            Eigen::Index best = 0;
            logits.row(r).maxCoeff(&best);
            correct += static_cast<std::size_t>(best) == labels[static_cast<std::size_t>(start + r)] ? 1 : 0;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
}

TrainedModel train(const Dataset &dataset, nn::ArchitectureSpec spec, const Hyperparams &hp) {
    check_hyperparams(hp);
    if (dataset.size() == 0) {
        throw data_error("cannot train on an empty dataset");
    }
    Rng init_rng(derive_seed(hp.seed, {1}));
    nn::Network<float> net = nn::build_network<float>(spec, init_rng);

    const Mat<float> x = dataset.features.cast<float>();
    const auto labels = decode_labels(dataset.labels);
    const std::size_t num_classes = dataset.num_classes();

    TrainingMetadata meta;
    {
        const auto counts = class_counts(dataset.labels);
        const auto n = static_cast<double>(dataset.size());
        std::size_t present = 0;
        for (const auto c : counts) {
            present += c > 0 ? 1 : 0;
        }
        meta.class_weights.resize(num_classes, 1.0);
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (counts[c] > 0) {
                meta.class_weights[c] = n / (static_cast<double>(present) * static_cast<double>(counts[c]));
            }
        }
    }

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> monitor_rows;
    if (auto split = stratified_holdout(labels, num_classes, validation_fraction, derive_seed(hp.seed, {0}))) {
        train_rows = std::move(split->train);
        monitor_rows = std::move(split->validation);
    } else {
        log_warning("a class has fewer than 2 instances; early stopping monitors training accuracy");
        meta.used_validation_split = false;
        train_rows.resize(dataset.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            train_rows[i] = i;
        }
        monitor_rows = train_rows;
    }
    const Mat<float> monitor_x = gather_rows(x, monitor_rows);
    std::vector<std::size_t> monitor_labels(monitor_rows.size());
    for (std::size_t i = 0; i < monitor_rows.size(); ++i) {
        monitor_labels[i] = labels[monitor_rows[i]];
    }

    Rng shuffle_rng(derive_seed(hp.seed, {3}));
    Rng dropout_rng(derive_seed(hp.seed, {2}));
    const auto lr = static_cast<float>(hp.learning_rate);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<Mat<float>> best_params;
    std::size_t since_best = 0;
    std::vector<std::size_t> order = train_rows;
    std::vector<std::size_t> batch_labels;
    constexpr double compare_slack = 1e-12;

    for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
        shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
            const std::size_t count = std::min(hp.batch_size, order.size() - start);
            const std::span<const std::size_t> rows(order.data() + start, count);
            const Mat<float> batch = gather_rows(x, rows);
            batch_labels.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                batch_labels[i] = labels[rows[i]];
            }
            const Mat<float> probs = nn::softmax(net.forward(batch, dropout_rng));
            const double loss = nn::weighted_cross_entropy(probs, std::span<const std::size_t>(batch_labels),
                                                           meta.class_weights);
            if (!std::isfinite(loss)) {
                throw training_error("training diverged in epoch " + std::to_string(epoch) + " (non-finite loss)");
            }
            epoch_loss += loss * static_cast<double>(count);
            net.backward(nn::weighted_cross_entropy_grad(probs, std::span<const std::size_t>(batch_labels),
                                                         meta.class_weights));
            net.sgd_step(lr);
        }
        meta.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
        meta.epochs_run = epoch;

        const double acc = accuracy(net, monitor_x, monitor_labels);
        if (acc - best >= hp.min_delta - compare_slack) {
            best = acc;
            meta.best_epoch = epoch;
            best_params.clear();
            for (const auto *p : std::as_const(net).parameters()) {
                best_params.push_back(*p);
            }
            since_best = 0;
        } else if (++since_best >= hp.patience) {
            break;
        }
    }
    meta.best_accuracy = best;
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        *params[i] = std::move(best_params[i]);
    }
    return {std::move(spec), std::move(net), std::move(meta)};
}

}  // namespace

TrainedModel fit_dense(const Dataset &dataset, const Hyperparams &hp) {
    if (dataset.kind == DataKind::image) {
        throw config_error("dense networks take numerical or text data; use the conv network for images");
    }
    if (hp.depth == 0 || hp.units == 0) {
        throw config_error("dense networks need depth >= 1 and units >= 1");
    }
    nn::ArchitectureSpec spec;
    spec.kind = nn::Architecture::dense;
    spec.input_shape = {dataset.feature_dim()};
    spec.num_classes = dataset.num_classes();
    spec.depth = hp.depth;
    spec.units = hp.units;
    spec.dropout = hp.dropout;
    return train(dataset, std::move(spec), hp);
}

TrainedModel fit_conv(const Dataset &dataset, const Hyperparams &hp) {
    if (dataset.kind != DataKind::image || dataset.sample_shape.size() != 3) {
        throw config_error("the conv network needs image data of shape (H, W, Ch)");
    }
    const auto min_extent = static_cast<std::size_t>(nn::conv_min_input_extent());
    if (dataset.sample_shape[0] < min_extent || dataset.sample_shape[1] < min_extent) {
        throw config_error("image size " + std::to_string(dataset.sample_shape[0]) + "x" +
                           std::to_string(dataset.sample_shape[1]) +
                           " is too small for the conv/pool stack; minimum input size is " +
                           std::to_string(min_extent) + "x" + std::to_string(min_extent));
    }
    nn::ArchitectureSpec spec;
    spec.kind = nn::Architecture::conv;
    spec.input_shape = dataset.sample_shape;
    spec.num_classes = dataset.num_classes();
    return train(dataset, std::move(spec), hp);
}

TrainedModel fit(const Dataset &dataset, const Hyperparams &hp) {
    return hp.architecture == nn::Architecture::conv ? fit_conv(dataset, hp) : fit_dense(dataset, hp);
}

}  // namespace labelsift
