#include "support.hpp"

#include "labelsift/errors.hpp"
#include "labelsift/nn/checkpoint.hpp"
#include "labelsift/nn/model.hpp"
#include "labelsift/preprocess.hpp"
#include "labelsift/synthetic.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <numbers>

using namespace labelsift;
using namespace labelsift::nn;

namespace {

/// Two-class logistic regression fitted by Newton's method with a small ridge
/// term; returns the training accuracy.
double logistic_regression_accuracy(const FeatureMatrix &x, const std::vector<std::size_t> &y) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols() + 1;
    Eigen::MatrixXd design(n, d);
    design.leftCols(x.cols()) = x;
    design.col(x.cols()).setOnes();
    Eigen::VectorXd target(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        target(i) = static_cast<double>(y[static_cast<std::size_t>(i)]);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (int iter = 0; iter < 25; ++iter) {
        const Eigen::VectorXd p = ((-(design * w).array()).exp() + 1.0).inverse().matrix();
        const Eigen::VectorXd grad = design.transpose() * (p - target) + 1e-3 * w;
        const Eigen::VectorXd s = (p.array() * (1.0 - p.array())).matrix();
        Eigen::MatrixXd hessian = design.transpose() * s.asDiagonal() * design;
        hessian.diagonal().array() += 1e-3;
        w -= hessian.ldlt().solve(grad);
    }
    const Eigen::VectorXd score = design * w;
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        correct += (score(i) > 0.0 ? 1U : 0U) == y[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

double accuracy(const PredictionMatrix &probs, const LabelMatrix &labels) {
    const auto truth = decode_labels(labels);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        Eigen::Index best = 0;
        probs.row(i).maxCoeff(&best);
        correct += static_cast<std::size_t>(best) == truth[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

Dataset small_images(std::size_t n, std::size_t extent, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.kind = DataKind::image;
    ds.sample_shape = {extent, extent, 1};
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(extent * extent));
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i % 3;
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            // Class c brightens row band c of the image.
            const auto row = static_cast<std::size_t>(j) / extent;
            const double signal = row * 3 / extent == labels[i] ? 1.0 : 0.0;
            ds.features(static_cast<Eigen::Index>(i), j) = signal + 0.3 * uniform_unit(rng);
        }
    }
    ds.labels = one_hot_encode(std::span<const std::size_t>(labels), 3);
    ds.class_names = {"0", "1", "2"};
    return ds;
}

}  // namespace

TEST_SUITE("neural_net") {

TEST_CASE("softmax") {
    const auto uniform = softmax(std::vector<double>{0, 0, 0});
    for (const double p : uniform) {
        CHECK(p == doctest::Approx(1.0 / 3.0));
    }
    const auto big = softmax(std::vector<double>{1000, 0});
    CHECK(std::isfinite(big[0]));
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] == doctest::Approx(0.0));
    const auto ln2 = softmax(std::vector<double>{std::numbers::ln2, 0});
    CHECK(ln2[0] == doctest::Approx(2.0 / 3.0));
    CHECK(ln2[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("weighted cross-entropy") {
    Mat<double> perfect(2, 2);
    perfect << 1, 0, 0, 1;
    const std::vector<std::size_t> targets{0, 1};
    const std::vector<double> any{3.0, 0.5};
    CHECK(weighted_cross_entropy(perfect, std::span<const std::size_t>(targets), std::span<const double>(any)) ==
          doctest::Approx(0.0).epsilon(1e-9));

    Mat<double> half(1, 2);
    half << 0.5, 0.5;
    const std::vector<std::size_t> zero{0};
    const std::vector<double> ones{1.0, 1.0};
    const std::vector<double> two_one{2.0, 1.0};
    CHECK(weighted_cross_entropy(half, std::span<const std::size_t>(zero), std::span<const double>(ones)) ==
          doctest::Approx(std::numbers::ln2));
    CHECK(weighted_cross_entropy(half, std::span<const std::size_t>(zero), std::span<const double>(two_one)) ==
          doctest::Approx(2.0 * std::numbers::ln2));
}

TEST_CASE("layer gradients match finite differences") {
    SUBCASE("dense") {
        Dense<double> layer(5, 4);
        test::randomize_parameters(layer, 11);
        CHECK(test::layer_gradient_error(layer, test::random_matrix(3, 5, 12), 13) < 1e-6);
    }
    SUBCASE("relu") {
        Relu<double> layer(6);
        CHECK(test::layer_gradient_error(layer, test::random_matrix(4, 6, 21), 22) < 1e-6);
    }
    SUBCASE("dropout with a fixed mask") {
        Dropout<double> layer(4, 0.5);
        Mat<double> mask(2, 4);
        mask << 2, 0, 2, 2, 0, 0, 2, 0;
        layer.fix_mask(mask);
        Mat<double> x = test::random_matrix(2, 4, 31);
        Mat<double> out;
        Rng rng(1);
        layer.forward(x, out, rng);
        CHECK(out == x.cwiseProduct(mask));
        Mat<double> grad_in;
        layer.backward(Mat<double>::Ones(2, 4), grad_in);
        CHECK(grad_in == mask);
    }
    SUBCASE("conv single channel") {
        Conv2d<double> layer({6, 5, 1}, 3, 2);
        test::randomize_parameters(layer, 41);
        CHECK(test::layer_gradient_error(layer, test::random_matrix(2, 30, 42), 43) < 1e-6);
    }
    SUBCASE("conv multi channel, 3x3 kernel") {
        Conv2d<double> layer({5, 6, 3}, 4, 3);
        test::randomize_parameters(layer, 51);
        CHECK(test::layer_gradient_error(layer, test::random_matrix(2, 90, 52), 53) < 1e-6);
    }
    SUBCASE("conv with fused ReLU") {
        Conv2d<double> layer({5, 6, 2}, 4, 2, true);
        test::randomize_parameters(layer, 45);
        CHECK(test::layer_gradient_error(layer, test::random_matrix(2, 60, 46), 47) < 1e-6);
    }
    SUBCASE("max pool") {
        MaxPool2d<double> layer({7, 7, 2}, 3, 3);
        CHECK(test::layer_gradient_error(layer, test::random_matrix(2, 98, 61), 62) < 1e-6);
    }
    SUBCASE("softmax cross-entropy") {
        CHECK(test::softmax_cross_entropy_gradient_error(5, 4, 71) < 1e-6);
    }
}

TEST_CASE("convolution matches a direct loop") {
    Conv2d<double> layer({4, 5, 2}, 3, 2);
    test::randomize_parameters(layer, 3);
    const Mat<double> x = test::random_matrix(2, 40, 4);
    Mat<double> out;
    layer.infer(x, out);
    const Mat<double> &w = layer.parameters()[0];
    const Mat<double> &b = layer.parameters()[1];
    for (Index n = 0; n < 2; ++n) {
        for (Index oy = 0; oy < 3; ++oy) {
            for (Index ox = 0; ox < 4; ++ox) {
                for (Index f = 0; f < 3; ++f) {
                    double expected = b(0, f);
                    for (Index ky = 0; ky < 2; ++ky) {
                        for (Index kx = 0; kx < 2; ++kx) {
                            for (Index ch = 0; ch < 2; ++ch) {
                                expected += x(n, ((oy + ky) * 5 + ox + kx) * 2 + ch) * w((ky * 2 + kx) * 2 + ch, f);
                            }
                        }
                    }
                    CHECK(out(n, (oy * 4 + ox) * 3 + f) == doctest::Approx(expected).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("fused ReLU equals a convolution followed by a ReLU layer") {
    Conv2d<double> plain({5, 6, 2}, 4, 2);
    test::randomize_parameters(plain, 8);
    Conv2d<double> fused({5, 6, 2}, 4, 2, true);
    fused.parameters() = plain.parameters();
    Relu<double> relu(plain.output_size());
    const Mat<double> x = test::random_matrix(3, 60, 9);
    const Mat<double> g = test::random_matrix(3, plain.output_size(), 10);
    Rng rng(1);

    Mat<double> conv_out, expected, fused_out;
    plain.forward(x, conv_out, rng);
    relu.forward(conv_out, expected, rng);
    fused.forward(x, fused_out, rng);
    CHECK(fused_out == expected);

    Mat<double> relu_grad, expected_grad, fused_grad;
    relu.backward(g, relu_grad);
    plain.backward(relu_grad, expected_grad);
    fused.backward(g, fused_grad);
    CHECK(fused_grad == expected_grad);
    CHECK(fused.gradients()[0] == plain.gradients()[0]);
    CHECK(fused.gradients()[1] == plain.gradients()[1]);
}

TEST_CASE("max pooling routes the gradient to the first maximum") {
    MaxPool2d<double> layer({3, 3, 1}, 3, 3);
    Mat<double> x(1, 9);
    x << 1, 5, 2, 5, 0, 0, 0, 0, 0;
    Mat<double> out;
    Rng rng(0);
    layer.forward(x, out, rng);
    CHECK(out(0, 0) == 5.0);
    Mat<double> grad_in;
    layer.backward(Mat<double>::Constant(1, 1, 2.0), grad_in);
    CHECK(grad_in(0, 1) == 2.0);
    CHECK(grad_in(0, 3) == 0.0);
    CHECK(grad_in.sum() == 2.0);
}

TEST_CASE("whole dense network gradient") {
    Rng rng(5);
    ArchitectureSpec spec{Architecture::dense, {4}, 3, 2, 6, 0.0};
    Network<double> net = build_network<double>(spec, rng);
    const Mat<double> x = test::random_matrix(5, 4, 6);
    const std::vector<std::size_t> y{0, 2, 1, 1, 0};
    const std::vector<double> w{1.0, 0.7, 1.6};
    auto loss = [&] {
        return weighted_cross_entropy(softmax(net.infer(x)), std::span<const std::size_t>(y),
                                      std::span<const double>(w));
    };
    const Mat<double> &logits = net.forward(x, rng);
    net.backward(weighted_cross_entropy_grad(softmax(logits), std::span<const std::size_t>(y),
                                             std::span<const double>(w)));
    std::vector<Mat<double>> analytic;
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (const auto &g : net.layer(i).gradients()) {
            analytic.push_back(g);
        }
    }
    std::size_t k = 0;
    for (auto *p : net.parameters()) {
        CHECK(test::relative_error(analytic[k++], test::numeric_gradient(*p, loss)) < 1e-6);
    }
}

TEST_CASE("minimum image extent of the conv stack") {
    // Oracle: the smallest square extent the layer constructors accept.
    Index smallest = 0;
    for (Index s = 1; s <= 64 && smallest == 0; ++s) {
        Rng rng(0);
        ArchitectureSpec spec{Architecture::conv, {static_cast<std::size_t>(s), static_cast<std::size_t>(s), 1}, 10};
        try {
            (void)build_network<float>(spec, rng);
            smallest = s;
        } catch (const std::invalid_argument &) {
        }
    }
    CHECK(smallest == conv_min_input_extent());
    CHECK(conv_min_input_extent() == 17);

    Dataset tiny = small_images(30, 4, 1);
    CHECK_THROWS_AS((void)fit_conv(tiny, Hyperparams::conv()), config_error);
}

TEST_CASE("dense fit on separable data reaches the logistic-regression baseline") {
    const Dataset raw = test::two_clouds(400, 2, 1.8, 3);
    const Dataset ds = preprocess(raw);
    const double baseline = logistic_regression_accuracy(ds.features, decode_labels(ds.labels));
    REQUIRE(baseline >= 0.95);

    Hyperparams hp;
    hp.depth = 1;
    hp.units = 50;
    hp.seed = 9;
    const TrainedModel model = fit_dense(ds, hp);
    CHECK(accuracy(model.predict_proba(ds.features), ds.labels) >= 0.95);
}

TEST_CASE("training contracts") {
    const Dataset ds = preprocess(test::two_clouds(120, 3, 2.0, 1));
    Hyperparams hp;
    hp.max_epochs = 0;
    CHECK_THROWS_AS((void)fit_dense(ds, hp), config_error);

    Hyperparams exploding;
    exploding.learning_rate = 1e30;
    exploding.max_epochs = 5;
    CHECK_THROWS_AS((void)fit_dense(ds, exploding), training_error);

    Dataset images = small_images(30, 17, 2);
    CHECK_THROWS_AS((void)fit_dense(images, Hyperparams{}), config_error);
}

TEST_CASE("same seed gives bit-identical parameters") {
    const Dataset ds = preprocess(test::two_clouds(200, 3, 1.0, 4));
    Hyperparams hp;
    hp.depth = 2;
    hp.units = 16;
    hp.dropout = 0.2;
    hp.max_epochs = 8;
    hp.seed = 77;
    const auto a = serialize_model(fit_dense(ds, hp));
    const auto b = serialize_model(fit_dense(ds, hp));
    CHECK(a == b);
    hp.seed = 78;
    CHECK(serialize_model(fit_dense(ds, hp)) != a);
}

TEST_CASE("full-batch descent with a small step never increases the loss") {
    const Dataset ds = preprocess(test::two_clouds(100, 4, 0.8, 8));
    Hyperparams hp;
    hp.depth = 2;
    hp.units = 20;
    hp.learning_rate = 1e-3;
    hp.batch_size = 1000;
    hp.max_epochs = 40;
    hp.patience = 1000;
    hp.seed = 3;
    const TrainedModel model = fit_dense(ds, hp);
    const auto &losses = model.metadata().epoch_losses;
    REQUIRE(losses.size() == 40);
    for (std::size_t e = 1; e < losses.size(); ++e) {
        CHECK(losses[e] <= losses[e - 1] + 1e-7);
    }
    CHECK(losses.back() < losses.front());
}

TEST_CASE("early stopping metadata") {
    const Dataset ds = preprocess(test::two_clouds(300, 2, 3.0, 5));
    Hyperparams hp;
    hp.seed = 1;
    const TrainedModel model = fit_dense(ds, hp);
    const auto &meta = model.metadata();
    CHECK(meta.used_validation_split);
    CHECK(meta.epochs_run <= hp.max_epochs);
    CHECK(meta.best_epoch <= meta.epochs_run);
    CHECK(meta.epochs_run - meta.best_epoch <= hp.patience);
    CHECK(meta.epochs_run < hp.max_epochs);

    Dataset lonely = test::make_dataset({{0.0}, {0.1}, {0.2}, {1.0}}, {0, 0, 0, 1}, 2);
    Hyperparams short_run;
    short_run.max_epochs = 3;
    CHECK_FALSE(fit_dense(lonely, short_run).metadata().used_validation_split);
}

TEST_CASE("stratified holdout") {
    std::vector<std::size_t> labels;
    for (int i = 0; i < 50; ++i) {
        labels.push_back(i < 30 ? 0 : 1);
    }
    const auto split = stratified_holdout(labels, 2, 0.1, 4);
    REQUIRE(split.has_value());
    CHECK(split->validation.size() == 5);
    CHECK(split->train.size() + split->validation.size() == 50);
    std::size_t held_zero = 0;
    for (const auto i : split->validation) {
        held_zero += labels[i] == 0 ? 1 : 0;
    }
    CHECK(held_zero == 3);

    const std::vector<std::size_t> singleton{0, 0, 1};
    CHECK_FALSE(stratified_holdout(singleton, 2, 0.1, 4).has_value());
}

TEST_CASE("predictions are distributions and repeatable") {
    const Dataset ds = preprocess(test::two_clouds(150, 3, 1.5, 6));
    Hyperparams hp;
    hp.max_epochs = 5;
    const TrainedModel model = fit_dense(ds, hp);
    const PredictionMatrix p = model.predict_proba(ds.features);
    CHECK(p.rows() == 150);
    CHECK(p.cols() == 2);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
    CHECK(model.predict_proba(ds.features) == p);
    CHECK(predict_proba(model, ds.features.topRows(1)).rows() == 1);
    CHECK_THROWS_AS((void)model.predict_proba(FeatureMatrix::Zero(2, 5)), data_error);
}

TEST_CASE("conv model on 28x28 images") {
    const Dataset ds = preprocess(small_images(60, 28, 7));
    Hyperparams hp = Hyperparams::conv();
    hp.max_epochs = 2;
    hp.seed = 5;
    const TrainedModel model = fit_conv(ds, hp);
    const PredictionMatrix p = model.predict_proba(ds);
    CHECK(p.rows() == 60);
    CHECK(p.cols() == 3);
    CHECK(p.row(0).sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(serialize_model(fit_conv(ds, hp)) == serialize_model(model));
}

TEST_CASE("checkpoint round trip") {
    test::TempDir dir;
    const Dataset ds = preprocess(test::two_clouds(100, 3, 2.0, 9));
    Hyperparams hp;
    hp.depth = 2;
    hp.units = 8;
    hp.max_epochs = 4;
    const TrainedModel model = fit_dense(ds, hp);
    save_model(model, dir / "m.ckpt");
    const TrainedModel back = load_model(dir / "m.ckpt");
    CHECK(back.architecture() == model.architecture());
    CHECK(back.metadata().epochs_run == model.metadata().epochs_run);
    CHECK(back.predict_proba(ds.features) == model.predict_proba(ds.features));
    CHECK(serialize_model(back) == serialize_model(model));

    auto bytes = serialize_model(model);
    bytes[0] = 'X';
    CHECK_THROWS_AS((void)deserialize_model(bytes), data_error);
    bytes = serialize_model(model);
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS((void)deserialize_model(bytes), data_error);
}

}  // TEST_SUITE
