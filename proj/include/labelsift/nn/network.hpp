#pragma once

#include "labelsift/nn/layers.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace labelsift::nn {

enum class Architecture : std::uint8_t { dense = 0, conv = 1 };

/// Fixed layout of the image classifier.
struct ConvLayout {
    static constexpr Index kernel = 2;
    static constexpr Index pool = 3;
    static constexpr Index block_filters[2] = {48, 96};
    static constexpr double block_dropout = 0.25;
    static constexpr Index dense_units = 128;
    static constexpr int dense_layers = 3;
    static constexpr double dense_dropout = 0.5;
};

/// Smallest height/width accepted by the conv stack: each block shrinks an
/// extent s to floor((s - 2) / 3) and must leave at least one pooled cell.
[[nodiscard]] constexpr Index conv_min_input_extent() noexcept {
    Index s = 1;
    for (;; ++s) {
        Index e = s;
        bool ok = true;
        for (int block = 0; block < 2 && ok; ++block) {
            e -= 2 * (ConvLayout::kernel - 1);
            ok = e >= ConvLayout::pool;
            e = ok ? (e - ConvLayout::pool) / ConvLayout::pool + 1 : 0;
        }
        if (ok) {
            return s;
        }
    }
}

/// Everything needed to rebuild a network's layer stack.
struct ArchitectureSpec {
    Architecture kind = Architecture::dense;
    std::vector<std::size_t> input_shape;  // {D} or {H, W, Ch}
    std::size_t num_classes = 0;
    std::size_t depth = 0;  // dense only
    std::size_t units = 0;  // dense only
    double dropout = 0.0;   // dense only

    friend bool operator==(const ArchitectureSpec &, const ArchitectureSpec &) = default;
};

/// Sequential stack of layers ending in a logit layer.
template <typename T>
class Network {
  public:
    Network() = default;
    Network(const Network &other) { *this = other; }
    Network &operator=(const Network &other) {
        if (this != &other) {
            layers_.clear();
            for (const auto &layer : other.layers_) {
                layers_.push_back(layer->clone());
            }
            activations_.clear();
            input_grads_.clear();
        }
        return *this;
    }
    Network(Network &&) noexcept = default;
    Network &operator=(Network &&) noexcept = default;
    ~Network() = default;

    void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

    [[nodiscard]] std::size_t size() const noexcept { return layers_.size(); }
    [[nodiscard]] Layer<T> &layer(std::size_t i) { return *layers_[i]; }
    [[nodiscard]] const Layer<T> &layer(std::size_t i) const { return *layers_[i]; }
    [[nodiscard]] Index input_size() const { return layers_.front()->input_size(); }
    [[nodiscard]] Index output_size() const { return layers_.back()->output_size(); }

    /// Training pass; returns the logits.
    const Mat<T> &forward(const Mat<T> &in, Rng &rng) {
        activations_.resize(layers_.size());
        const Mat<T> *current = &in;
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            layers_[i]->forward(*current, activations_[i], rng);
            current = &activations_[i];
        }
        return *current;
    }

    /// Backpropagates dL/d(logits) through every layer, leaving parameter
    /// gradients in each layer.
    void backward(const Mat<T> &grad_logits) {
        input_grads_.resize(layers_.size());
        const Mat<T> *grad = &grad_logits;
        for (std::size_t i = layers_.size(); i-- > 0;) {
            layers_[i]->backward(*grad, input_grads_[i]);
            grad = &input_grads_[i];
        }
    }

    /// dL/d(input) from the last backward().
    [[nodiscard]] const Mat<T> &input_gradient() const noexcept { return input_grads_.front(); }

    /// Deterministic logits with dropout disabled.
    [[nodiscard]] Mat<T> infer(const Mat<T> &in) const {
        Mat<T> a = in;
        Mat<T> b;
        for (const auto &layer : layers_) {
            layer->infer(a, b);
            std::swap(a, b);
        }
        return a;
    }

    void sgd_step(T learning_rate) {
        for (auto &layer : layers_) {
            auto &params = layer->parameters();
            auto &grads = layer->gradients();
            for (std::size_t p = 0; p < params.size(); ++p) {
                params[p].noalias() -= learning_rate * grads[p];
            }
        }
    }

    /// Flat list of parameter tensors in layer order.
    [[nodiscard]] std::vector<Mat<T> *> parameters() {
        std::vector<Mat<T> *> out;
        for (auto &layer : layers_) {
            for (auto &p : layer->parameters()) {
                out.push_back(&p);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<const Mat<T> *> parameters() const {
        std::vector<const Mat<T> *> out;
        for (const auto &layer : layers_) {
            for (const auto &p : layer->parameters()) {
                out.push_back(&p);
            }
        }
        return out;
    }

    [[nodiscard]] std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto *p : parameters()) {
            n += static_cast<std::size_t>(p->size());
        }
        return n;
    }

  private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<Mat<T>> activations_;
    /// input_grads_[i] holds dL/d(input of layer i).
    std::vector<Mat<T>> input_grads_;
};

/// Builds the layer stack for `spec` with freshly initialized weights
/// (He-uniform for ReLU layers, Glorot-uniform for the logit layer, zero biases).
/// Throws std::invalid_argument for a malformed spec.
template <typename T>
[[nodiscard]] Network<T> build_network(const ArchitectureSpec &spec, Rng &rng) {
    Network<T> net;
    const auto classes = static_cast<Index>(spec.num_classes);
    Index width = 0;
    auto add_dense_relu = [&](Index in, Index out, double dropout) {
        auto dense = std::make_unique<Dense<T>>(in, out);
        he_uniform(dense->weights(), in, rng);
        net.add(std::move(dense));
        net.add(std::make_unique<Relu<T>>(out));
        if (dropout > 0.0) {
            net.add(std::make_unique<Dropout<T>>(out, dropout));
        }
    };

    if (spec.kind == Architecture::dense) {
        if (spec.input_shape.size() != 1 || spec.input_shape[0] == 0 || spec.depth == 0 || spec.units == 0) {
            throw std::invalid_argument("dense architecture needs a (D) input, depth >= 1 and units >= 1");
        }
        width = static_cast<Index>(spec.input_shape[0]);
        for (std::size_t layer = 0; layer < spec.depth; ++layer) {
            add_dense_relu(width, static_cast<Index>(spec.units), spec.dropout);
            width = static_cast<Index>(spec.units);
        }
    } else {
        if (spec.input_shape.size() != 3) {
            throw std::invalid_argument("conv architecture needs a (H, W, Ch) input");
        }
        ImageShape shape{static_cast<Index>(spec.input_shape[0]), static_cast<Index>(spec.input_shape[1]),
                         static_cast<Index>(spec.input_shape[2])};
        if (shape.height < conv_min_input_extent() || shape.width < conv_min_input_extent()) {
            throw std::invalid_argument("image too small for the conv stack");
        }
        for (const Index filters : ConvLayout::block_filters) {
            for (int rep = 0; rep < 2; ++rep) {
                auto conv = std::make_unique<Conv2d<T>>(shape, filters, ConvLayout::kernel, true);
                he_uniform(conv->weights(), ConvLayout::kernel * ConvLayout::kernel * shape.channels, rng);
                shape = conv->output_shape();
                net.add(std::move(conv));
            }
            auto pool = std::make_unique<MaxPool2d<T>>(shape, ConvLayout::pool, ConvLayout::pool);
            shape = pool->output_shape();
            net.add(std::move(pool));
            net.add(std::make_unique<Dropout<T>>(shape.size(), ConvLayout::block_dropout));
        }
        width = shape.size();
        for (int layer = 0; layer < ConvLayout::dense_layers; ++layer) {
            add_dense_relu(width, ConvLayout::dense_units, ConvLayout::dense_dropout);
            width = ConvLayout::dense_units;
        }
    }
    auto logits = std::make_unique<Dense<T>>(width, classes);
    glorot_uniform(logits->weights(), width, classes, rng);
    net.add(std::move(logits));
    return net;
}

}  // namespace labelsift::nn
