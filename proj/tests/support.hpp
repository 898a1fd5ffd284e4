#pragma once

#include "labelsift/dataset.hpp"
#include "labelsift/nn/layers.hpp"
#include "labelsift/nn/loss.hpp"
#include "labelsift/nn/network.hpp"
#include "labelsift/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

namespace labelsift::test {

/// Directory removed with everything in it when the object goes away.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("labelsift-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;
    ~TempDir() {
        std::error_code ignored;
        std::filesystem::remove_all(path_, ignored);
    }
    [[nodiscard]] const std::filesystem::path &path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Numerical dataset from explicit rows and labels.
inline Dataset make_dataset(const std::vector<std::vector<double>> &rows, const std::vector<std::size_t> &labels,
                            std::size_t num_classes) {
    Dataset ds;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
    ds.features.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    ds.sample_shape = {static_cast<std::size_t>(d)};
    ds.labels = one_hot_encode(std::span<const std::size_t>(labels), num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        ds.class_names.push_back("c" + std::to_string(c));
    }
    return ds;
}

/// Two Gaussian clouds centred at -shift and +shift on every axis.
inline Dataset two_clouds(std::size_t n, std::size_t d, double shift, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 2;
        for (auto &v : rows[i]) {
            v = noise(rng) + (labels[i] == 0 ? -shift : shift);
        }
    }
    return make_dataset(rows, labels, 2);
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const nn::Mat<double> &analytic, const nn::Mat<double> &numeric) {
    const double scale = std::max(analytic.norm(), numeric.norm());
    return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

/// Central finite differences of `loss` with respect to every entry of `x`.
template <typename Loss>
nn::Mat<double> numeric_gradient(nn::Mat<double> &x, Loss &&loss, double h = 1e-6) {
    nn::Mat<double> grad(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double saved = x.data()[i];
        x.data()[i] = saved + h;
        const double up = loss();
        x.data()[i] = saved - h;
        const double down = loss();
        x.data()[i] = saved;
        grad.data()[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

/// Worst relative error over the input gradient and every parameter gradient
/// of `layer`, using the scalar probe L = sum(out .* probe).
inline double layer_gradient_error(nn::Layer<double> &layer, nn::Mat<double> x, std::uint64_t seed) {
    Rng rng(seed);
    nn::Mat<double> out;
    layer.infer(x, out);
    nn::Mat<double> probe(out.rows(), out.cols());
    for (Eigen::Index i = 0; i < probe.size(); ++i) {
        probe.data()[i] = 2.0 * uniform_unit(rng) - 1.0;
    }
    auto loss = [&] {
        nn::Mat<double> y;
        layer.infer(x, y);
        return y.cwiseProduct(probe).sum();
    };

    nn::Mat<double> grad_in;
    layer.forward(x, out, rng);
    layer.backward(probe, grad_in);

    double worst = relative_error(grad_in, numeric_gradient(x, loss));
    for (std::size_t p = 0; p < layer.parameters().size(); ++p) {
        worst = std::max(worst, relative_error(layer.gradients()[p], numeric_gradient(layer.parameters()[p], loss)));
    }
    return worst;
}

inline nn::Mat<double> random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    nn::Mat<double> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = scale * (2.0 * uniform_unit(rng) - 1.0);
    }
    return m;
}

/// Fills every parameter of a layer with uniform values in [-scale, scale].
inline void randomize_parameters(nn::Layer<double> &layer, std::uint64_t seed, double scale = 0.5) {
    std::uint64_t s = seed;
    for (auto &p : layer.parameters()) {
        p = random_matrix(p.rows(), p.cols(), ++s, scale);
    }
}

/// Relative error of weighted_cross_entropy_grad against finite differences of
/// weighted_cross_entropy(softmax(logits)).
inline double softmax_cross_entropy_gradient_error(Eigen::Index batch, Eigen::Index classes, std::uint64_t seed) {
    nn::Mat<double> logits = random_matrix(batch, classes, seed, 3.0);
    Rng rng(seed + 1);
    std::vector<std::size_t> targets(static_cast<std::size_t>(batch));
    for (auto &t : targets) {
        t = uniform_below(rng, static_cast<std::uint64_t>(classes));
    }
    std::vector<double> weights(static_cast<std::size_t>(classes));
    for (auto &w : weights) {
        w = 0.5 + uniform_unit(rng);
    }
    auto loss = [&] {
        return nn::weighted_cross_entropy(nn::softmax(logits), std::span<const std::size_t>(targets),
                                          std::span<const double>(weights));
    };
    const nn::Mat<double> analytic = nn::weighted_cross_entropy_grad(
        nn::softmax(logits), std::span<const std::size_t>(targets), std::span<const double>(weights));
    return relative_error(analytic, numeric_gradient(logits, loss));
}

/// Shell-quotes a single argument.
inline std::string quote(const std::string &arg) {
    std::string out = "'";
    for (const char ch : arg) {
        out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
    }
    return out + "'";
}

struct CommandResult {
    int status = -1;
    std::string out;
    std::string err;
};

/// Runs the labelsift executable with `args`, capturing both streams.
inline CommandResult run_cli(const std::vector<std::string> &args, const TempDir &scratch) {
    std::ostringstream cmd;
    cmd << quote(LABELSIFT_CLI_PATH);
    for (const auto &a : args) {
        cmd << ' ' << quote(a);
    }
    const auto out_path = scratch / "stdout.txt";
    const auto err_path = scratch / "stderr.txt";
    cmd << " >" << quote(out_path.string()) << " 2>" << quote(err_path.string());
    const int raw = std::system(cmd.str().c_str());
    CommandResult result;
    result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = read_file(out_path);
    result.err = read_file(err_path);
    return result;
}

}  // namespace labelsift::test
