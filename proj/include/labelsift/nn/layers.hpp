#pragma once

#include "labelsift/random.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace labelsift::nn {

/// Row-major matrix; a batch is stored with one instance per row.
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

enum class LayerKind { dense, relu, dropout, conv2d, max_pool2d };

template <typename T>
class Layer {
  public:
    virtual ~Layer() = default;

    /// Training-mode pass; caches what backward() needs.
    virtual void forward(const Mat<T> &in, Mat<T> &out, Rng &rng) = 0;
    /// Inference-mode pass without side effects.
    virtual void infer(const Mat<T> &in, Mat<T> &out) const = 0;
    /// Writes dL/d(in) from dL/d(out) and overwrites the parameter gradients.
    virtual void backward(const Mat<T> &grad_out, Mat<T> &grad_in) = 0;

    [[nodiscard]] virtual LayerKind kind() const noexcept = 0;
    [[nodiscard]] virtual Index input_size() const noexcept = 0;
    [[nodiscard]] virtual Index output_size() const noexcept = 0;
    [[nodiscard]] virtual std::unique_ptr<Layer> clone() const = 0;

    [[nodiscard]] std::vector<Mat<T>> &parameters() noexcept { return params_; }
    [[nodiscard]] const std::vector<Mat<T>> &parameters() const noexcept { return params_; }
    [[nodiscard]] std::vector<Mat<T>> &gradients() noexcept { return grads_; }

  protected:
    std::vector<Mat<T>> params_;
    std::vector<Mat<T>> grads_;
};

/// He-uniform fill (limit sqrt(6 / fan_in)), sampled in double so that float
/// and double networks built from one seed hold the same values up to rounding.
template <typename T>
void he_uniform(Mat<T> &w, Index fan_in, Rng &rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (Index i = 0; i < w.size(); ++i) {
        w.data()[i] = static_cast<T>((2.0 * uniform_unit(rng) - 1.0) * limit);
    }
}

template <typename T>
void glorot_uniform(Mat<T> &w, Index fan_in, Index fan_out, Rng &rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Index i = 0; i < w.size(); ++i) {
        w.data()[i] = static_cast<T>((2.0 * uniform_unit(rng) - 1.0) * limit);
    }
}

/// y = x W + b with W of shape (in, out).
template <typename T>
class Dense final : public Layer<T> {
  public:
    Dense(Index in, Index out) : in_{in}, out_{out} {
        this->params_ = {Mat<T>::Zero(in, out), Mat<T>::Zero(1, out)};
        this->grads_ = this->params_;
    }

    Mat<T> &weights() noexcept { return this->params_[0]; }
    Mat<T> &bias() noexcept { return this->params_[1]; }

    void forward(const Mat<T> &in, Mat<T> &out, Rng &) override {
        input_ = in;
        infer(in, out);
    }

    void infer(const Mat<T> &in, Mat<T> &out) const override {
        out.noalias() = in * this->params_[0];
        out.rowwise() += this->params_[1].row(0);
    }

    void backward(const Mat<T> &grad_out, Mat<T> &grad_in) override {
        this->grads_[0].noalias() = input_.transpose() * grad_out;
        this->grads_[1] = grad_out.colwise().sum();
        grad_in.noalias() = grad_out * this->params_[0].transpose();
    }

    [[nodiscard]] LayerKind kind() const noexcept override { return LayerKind::dense; }
    [[nodiscard]] Index input_size() const noexcept override { return in_; }
    [[nodiscard]] Index output_size() const noexcept override { return out_; }
    [[nodiscard]] std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dense>(*this); }

  private:
    Index in_;
    Index out_;
    Mat<T> input_;
};

template <typename T>
class Relu final : public Layer<T> {
  public:
    explicit Relu(Index size) : size_{size} {}

    void forward(const Mat<T> &in, Mat<T> &out, Rng &) override {
        infer(in, out);
        output_.resize(out.rows(), out.cols());
        std::copy_n(out.data(), out.size(), output_.data());
    }

    void infer(const Mat<T> &in, Mat<T> &out) const override {
        out.resize(in.rows(), in.cols());
        const T *src = in.data();
        T *dst = out.data();
        for (Index i = 0, n = in.size(); i < n; ++i) {
            dst[i] = src[i] > T{0} ? src[i] : T{0};
        }
    }

    void backward(const Mat<T> &grad_out, Mat<T> &grad_in) override {
        grad_in.resize(grad_out.rows(), grad_out.cols());
        const T *g = grad_out.data();
        const T *y = output_.data();
        T *dst = grad_in.data();
        for (Index i = 0, n = grad_out.size(); i < n; ++i) {
            dst[i] = y[i] > T{0} ? g[i] : T{0};
        }
    }

    [[nodiscard]] LayerKind kind() const noexcept override { return LayerKind::relu; }
    [[nodiscard]] Index input_size() const noexcept override { return size_; }
    [[nodiscard]] Index output_size() const noexcept override { return size_; }
    [[nodiscard]] std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Relu>(*this); }

  private:
    Index size_;
    Mat<T> output_;
};

/// Inverted dropout: at train time each unit is zeroed with probability p and
/// survivors are scaled by 1 / (1 - p); inference is the identity.
template <typename T>
class Dropout final : public Layer<T> {
  public:
    Dropout(Index size, double rate) : size_{size}, rate_{rate} {
        if (!(rate >= 0.0 && rate < 1.0)) {
            throw std::invalid_argument("dropout rate must lie in [0, 1)");
        }
    }

    [[nodiscard]] double rate() const noexcept { return rate_; }

    /// Use `mask` (already scaled) instead of sampling on every training pass.
    void fix_mask(Mat<T> mask) { fixed_mask_ = std::move(mask); }

    void forward(const Mat<T> &in, Mat<T> &out, Rng &rng) override {
        if (fixed_mask_) {
            mask_ = *fixed_mask_;
        } else if (rate_ == 0.0) {
            mask_.setOnes(in.rows(), in.cols());
        } else {
            const T keep_scale = static_cast<T>(1.0 / (1.0 - rate_));
            mask_.resize(in.rows(), in.cols());
            for (Index i = 0; i < mask_.size(); ++i) {
                mask_.data()[i] = uniform_unit(rng) < rate_ ? T{0} : keep_scale;
            }
        }
        out = in.cwiseProduct(mask_);
    }

    void infer(const Mat<T> &in, Mat<T> &out) const override { out = in; }

    void backward(const Mat<T> &grad_out, Mat<T> &grad_in) override { grad_in = grad_out.cwiseProduct(mask_); }

    [[nodiscard]] LayerKind kind() const noexcept override { return LayerKind::dropout; }
    [[nodiscard]] Index input_size() const noexcept override { return size_; }
    [[nodiscard]] Index output_size() const noexcept override { return size_; }
    [[nodiscard]] std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Dropout>(*this); }

  private:
    Index size_;
    double rate_;
    Mat<T> mask_;
    std::optional<Mat<T>> fixed_mask_;
};

/// Spatial extent of an image batch row stored in height-width-channel order.
struct ImageShape {
    Index height = 0;
    Index width = 0;
    Index channels = 0;

    [[nodiscard]] Index size() const noexcept { return height * width * channels; }
    friend bool operator==(const ImageShape &, const ImageShape &) = default;
};

/// Valid (unpadded) stride-1 convolution with square kernels. Weights have
/// shape (k * k * in_channels, filters), rows ordered (ky, kx, channel).
///
/// The batch is viewed as one long run of pixels (B * H * W rows of
/// in_channels values). Shifting that view by ky * W + kx lines every output
/// pixel up with its (ky, kx) input pixel, so the convolution becomes k * k
/// accumulated products over a "full" grid of B * H * W rows, of which only
/// rows with y < Ho and x < Wo are kept. This avoids materializing patches.
///
/// With `relu` set the layer also applies max(0, .) to its output. The mask is
/// recovered from the cached pre-activations, so no separate ReLU layer (and
/// no copy of the output) is needed.
template <typename T>
class Conv2d final : public Layer<T> {
  public:
    Conv2d(ImageShape input, Index filters, Index kernel, bool relu = false)
        : input_{input}, filters_{filters}, kernel_{kernel}, relu_{relu} {
        if (input.height < kernel || input.width < kernel) {
            throw std::invalid_argument("convolution kernel larger than its input");
        }
        output_ = {input.height - kernel + 1, input.width - kernel + 1, filters};
        this->params_ = {Mat<T>::Zero(kernel * kernel * input.channels, filters), Mat<T>::Zero(1, filters)};
        this->grads_ = this->params_;
    }

    [[nodiscard]] ImageShape input_shape() const noexcept { return input_; }
    [[nodiscard]] ImageShape output_shape() const noexcept { return output_; }
    [[nodiscard]] Index kernel() const noexcept { return kernel_; }
    [[nodiscard]] bool fused_relu() const noexcept { return relu_; }
    Mat<T> &weights() noexcept { return this->params_[0]; }
    Mat<T> &bias() noexcept { return this->params_[1]; }

    void forward(const Mat<T> &in, Mat<T> &out, Rng &) override {
        input_cache_.resize(in.rows(), in.cols());
        std::copy_n(in.data(), in.size(), input_cache_.data());
        convolve(input_cache_, full_, out);
    }

    void infer(const Mat<T> &in, Mat<T> &out) const override {
        Mat<T> full;
        convolve(in, full, out);
    }

    void backward(const Mat<T> &grad_out, Mat<T> &grad_in) override {
        const Index batch = grad_out.rows();
        const Index pixels = batch * input_.height * input_.width;
        const Index cin = input_.channels;

        // Replace the cached pre-activations by the output gradient (masked by
        // the ReLU when fused); rows outside the valid output become zero.
        const T *bias = this->params_[1].data();
        const Index valid = output_.width * filters_;
        const Index stride = input_.width * filters_;
        for (Index b = 0; b < batch; ++b) {
            for (Index y = 0; y < input_.height; ++y) {
                T *dst = full_.data() + (b * input_.height + y) * stride;
                if (y >= output_.height) {
                    std::fill_n(dst, stride, T{0});
                    continue;
                }
                const T *src = grad_out.data() + b * grad_out.cols() + y * valid;
                if (relu_) {
                    for (Index px = 0; px < valid; px += filters_) {
                        for (Index f = 0; f < filters_; ++f) {
                            dst[px + f] = dst[px + f] + bias[f] > T{0} ? src[px + f] : T{0};
                        }
                    }
                } else {
                    std::copy_n(src, valid, dst);
                }
                std::fill_n(dst + valid, stride - valid, T{0});
            }
        }

        const Eigen::Map<const Mat<T>> x(input_cache_.data(), pixels, cin);
        grad_in.resize(batch, input_.size());
        Eigen::Map<Mat<T>> gx(grad_in.data(), pixels, cin);
        gx.noalias() = full_ * this->params_[0].topRows(cin).transpose();
        this->grads_[0].topRows(cin).noalias() = x.transpose() * full_;
        for (Index k = 1; k < kernel_ * kernel_; ++k) {
            const Index offset = (k / kernel_) * input_.width + k % kernel_;
            const Index rows = pixels - offset;
            this->grads_[0].middleRows(k * cin, cin).noalias() =
                x.middleRows(offset, rows).transpose() * full_.topRows(rows);
            gx.middleRows(offset, rows).noalias() +=
                full_.topRows(rows) * this->params_[0].middleRows(k * cin, cin).transpose();
        }
        this->grads_[1] = full_.colwise().sum();
    }

    [[nodiscard]] LayerKind kind() const noexcept override { return LayerKind::conv2d; }
    [[nodiscard]] Index input_size() const noexcept override { return input_.size(); }
    [[nodiscard]] Index output_size() const noexcept override { return output_.size(); }
    [[nodiscard]] std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<Conv2d>(*this); }

  private:
    void convolve(const Mat<T> &in, Mat<T> &full, Mat<T> &out) const {
        const Index batch = in.rows();
        const Index pixels = batch * input_.height * input_.width;
        const Index cin = input_.channels;
        const Eigen::Map<const Mat<T>> x(in.data(), pixels, cin);
        full.noalias() = x * this->params_[0].topRows(cin);
        for (Index k = 1; k < kernel_ * kernel_; ++k) {
            const Index offset = (k / kernel_) * input_.width + k % kernel_;
            const Index rows = pixels - offset;
            full.topRows(rows).noalias() += x.middleRows(offset, rows) * this->params_[0].middleRows(k * cin, cin);
        }
        out.resize(batch, output_.size());
        const T *bias = this->params_[1].data();
        const Index valid = output_.width * filters_;
        for (Index b = 0; b < batch; ++b) {
            for (Index oy = 0; oy < output_.height; ++oy) {
                const T *src = full.data() + ((b * input_.height + oy) * input_.width) * filters_;
                T *dst = out.data() + b * out.cols() + oy * valid;
                for (Index px = 0; px < valid; px += filters_) {
                    for (Index f = 0; f < filters_; ++f) {
                        const T v = src[px + f] + bias[f];
                        dst[px + f] = relu_ && !(v > T{0}) ? T{0} : v;
                    }
                }
            }
        }
    }

    ImageShape input_;
    ImageShape output_;
    Index filters_;
    Index kernel_;
    bool relu_;
    Mat<T> input_cache_;
    Mat<T> full_;
};

/// Per-channel max pooling over `size` x `size` windows moved by `stride`
/// (valid windows only). Gradients flow exclusively to the first maximal
/// element of each window.
template <typename T>
class MaxPool2d final : public Layer<T> {
  public:
    MaxPool2d(ImageShape input, Index size, Index stride) : input_{input}, size_{size}, stride_{stride} {
        if (input.height < size || input.width < size) {
            throw std::invalid_argument("pooling window larger than its input");
        }
        output_ = {(input.height - size) / stride + 1, (input.width - size) / stride + 1, input.channels};
    }

    [[nodiscard]] ImageShape input_shape() const noexcept { return input_; }
    [[nodiscard]] ImageShape output_shape() const noexcept { return output_; }

    void forward(const Mat<T> &in, Mat<T> &out, Rng &) override {
        argmax_.resize(static_cast<std::size_t>(in.rows() * output_.size()));
        pool(in, out, argmax_.data());
    }

    void infer(const Mat<T> &in, Mat<T> &out) const override { pool(in, out, nullptr); }

    void backward(const Mat<T> &grad_out, Mat<T> &grad_in) override {
        grad_in.setZero(grad_out.rows(), input_.size());
        const Index per_row = output_.size();
        for (Index b = 0; b < grad_out.rows(); ++b) {
            const T *g = grad_out.data() + b * per_row;
            const Index *where = argmax_.data() + b * per_row;
            T *dst = grad_in.data() + b * input_.size();
            for (Index o = 0; o < per_row; ++o) {
                dst[where[o]] += g[o];
            }
        }
    }

    [[nodiscard]] LayerKind kind() const noexcept override { return LayerKind::max_pool2d; }
    [[nodiscard]] Index input_size() const noexcept override { return input_.size(); }
    [[nodiscard]] Index output_size() const noexcept override { return output_.size(); }
    [[nodiscard]] std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPool2d>(*this); }

  private:
    void pool(const Mat<T> &in, Mat<T> &out, Index *argmax) const {
        const Index c = input_.channels;
        out.resize(in.rows(), output_.size());
        for (Index b = 0; b < in.rows(); ++b) {
            const T *src = in.data() + b * in.cols();
            T *dst = out.data() + b * out.cols();
            for (Index oy = 0; oy < output_.height; ++oy) {
                for (Index ox = 0; ox < output_.width; ++ox) {
                    const Index o = (oy * output_.width + ox) * c;
                    T *best_value = dst + o;
                    Index *best = argmax != nullptr ? argmax + b * output_.size() + o : nullptr;
                    // Windows are scanned row-major with strict '>' so the first maximum wins.
                    for (Index py = 0; py < size_; ++py) {
                        for (Index px = 0; px < size_; ++px) {
                            const Index base = ((oy * stride_ + py) * input_.width + ox * stride_ + px) * c;
                            const T *value = src + base;
                            if (py == 0 && px == 0) {
                                std::copy_n(value, c, best_value);
                                if (best != nullptr) {
                                    for (Index ch = 0; ch < c; ++ch) {
                                        best[ch] = base + ch;
                                    }
                                }
                                continue;
                            }
                            for (Index ch = 0; ch < c; ++ch) {
                                if (value[ch] > best_value[ch]) {
                                    best_value[ch] = value[ch];
                                    if (best != nullptr) {
                                        best[ch] = base + ch;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    ImageShape input_;
    ImageShape output_;
    Index size_;
    Index stride_;
    std::vector<Index> argmax_;
};

}  // namespace labelsift::nn
