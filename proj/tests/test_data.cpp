#include "support.hpp"

#include "labelsift/errors.hpp"
#include "labelsift/io.hpp"
#include "labelsift/preprocess.hpp"

#include <doctest.h>

using namespace labelsift;
using labelsift::test::TempDir;
using labelsift::test::write_file;

namespace {

std::string idx_images(std::uint32_t count, std::uint32_t rows, std::uint32_t cols, std::size_t pixels_written) {
    std::string out;
    auto be32 = [&](std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out.push_back(static_cast<char>((v >> shift) & 0xFF));
        }
    };
    be32(idx_images_magic);
    be32(count);
    be32(rows);
    be32(cols);
    for (std::size_t i = 0; i < pixels_written; ++i) {
        out.push_back(static_cast<char>(i % 251));
    }
    return out;
}

std::string idx_labels(const std::vector<std::uint8_t> &labels) {
    std::string out;
    for (const std::uint32_t v : {idx_labels_magic, static_cast<std::uint32_t>(labels.size())}) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out.push_back(static_cast<char>((v >> shift) & 0xFF));
        }
    }
    for (const auto l : labels) {
        out.push_back(static_cast<char>(l));
    }
    return out;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("one-hot encoding") {
    const std::vector<long long> two{1, 0};
    const LabelMatrix y = one_hot_encode(std::span<const long long>(two), 2);
    CHECK(y.rows() == 2);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 1.0);
    CHECK(y(1, 0) == 1.0);
    CHECK(y(1, 1) == 0.0);

    const std::vector<long long> one{0};
    const LabelMatrix z = one_hot_encode(std::span<const long long>(one), 3);
    CHECK(z.row(0).sum() == 1.0);
    CHECK(z(0, 0) == 1.0);

    const std::vector<long long> bad{2};
    CHECK_THROWS_AS((void)one_hot_encode(std::span<const long long>(bad), 2), invalid_label_error);
    const std::vector<long long> negative{-1};
    CHECK_THROWS_AS((void)one_hot_encode(std::span<const long long>(negative), 2), invalid_label_error);

    const std::vector<std::size_t> round{2, 0, 1, 1};
    CHECK(decode_labels(one_hot_encode(std::span<const std::size_t>(round), 3)) == round);
}

TEST_CASE("class weights are N / (C * N_c)") {
    const std::vector<std::size_t> a{0, 0, 0, 1};
    const auto w = class_weights(one_hot_encode(std::span<const std::size_t>(a), 2));
    CHECK(w[0] == doctest::Approx(4.0 / 6.0));
    CHECK(w[1] == doctest::Approx(2.0));

    const std::vector<std::size_t> balanced{0, 1, 2, 0, 1, 2};
    for (const double v : class_weights(one_hot_encode(std::span<const std::size_t>(balanced), 3))) {
        CHECK(v == 1.0);
    }

    const std::vector<std::size_t> b{0, 1, 2, 2};
    const auto w3 = class_weights(one_hot_encode(std::span<const std::size_t>(b), 3));
    CHECK(w3[0] == doctest::Approx(4.0 / 3.0));
    CHECK(w3[1] == doctest::Approx(4.0 / 3.0));
    CHECK(w3[2] == doctest::Approx(2.0 / 3.0));

    const std::vector<std::size_t> missing{0, 0, 2};
    CHECK_THROWS_AS((void)class_weights(one_hot_encode(std::span<const std::size_t>(missing), 3)), data_error);
}

TEST_CASE("dataset validation") {
    Dataset ok = test::make_dataset({{1.0}, {2.0}, {3.0}}, {0, 1, 0}, 2);
    CHECK_NOTHROW(ok.validate());

    Dataset one_class = test::make_dataset({{1.0}, {2.0}}, {0, 0}, 1);
    CHECK_THROWS_AS(one_class.validate(), data_error);

    Dataset fewer_rows_than_classes = test::make_dataset({{1.0}, {2.0}}, {0, 1}, 3);
    CHECK_THROWS_AS(fewer_rows_than_classes.validate(), data_error);

    Dataset nan = ok;
    nan.features(1, 0) = std::nan("");
    CHECK_THROWS_AS(nan.validate(), data_error);

    Dataset inf = ok;
    inf.features(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(inf.validate(), data_error);

    Dataset two_hot = ok;
    two_hot.labels(0, 1) = 1.0;
    CHECK_THROWS_AS(two_hot.validate(), data_error);

    Dataset image = ok;
    image.kind = DataKind::image;
    image.sample_shape = {1, 1, 2};
    CHECK_THROWS_AS(image.validate(), data_error);
    image.sample_shape = {1, 1, 1};
    CHECK_NOTHROW(image.validate());
}

TEST_CASE("min-max scaling") {
    FeatureMatrix x(3, 3);
    x << 2, 5, 0, 4, 5, 1, 6, 5, 0.5;
    const FeatureMatrix s = min_max_scale(x);
    CHECK(s(0, 0) == 0.0);
    CHECK(s(1, 0) == 0.5);
    CHECK(s(2, 0) == 1.0);
    for (int r = 0; r < 3; ++r) {
        CHECK(s(r, 1) == 0.0);
    }
    CHECK(s(0, 2) == 0.0);
    CHECK(s(1, 2) == 1.0);
    CHECK(s(2, 2) == 0.5);
}

TEST_CASE("standardization") {
    FeatureMatrix x(2, 2);
    x << 0, 10, 2, 10;
    const FeatureMatrix s = standardize(x);
    CHECK(s(0, 0) == doctest::Approx(-1.0));
    CHECK(s(1, 0) == doctest::Approx(1.0));
    CHECK(s(0, 1) == 0.0);
    CHECK(s(1, 1) == 0.0);

    FeatureMatrix y(2, 1);
    y << 1, 3;
    const FeatureMatrix t = standardize(y);
    CHECK(t(0, 0) == doctest::Approx(-1.0));
    CHECK(t(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("preprocess dispatches on kind") {
    Dataset numeric = test::make_dataset({{0.0}, {4.0}, {2.0}}, {0, 1, 0}, 2);
    CHECK(preprocess(numeric).features(2, 0) == 0.5);

    Dataset image = numeric;
    image.kind = DataKind::image;
    image.sample_shape = {1, 1, 1};
    const Dataset prepared = preprocess(image);
    CHECK(prepared.features.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(prepared.labels == image.labels);
}

TEST_CASE("document embedding") {
    EmbeddingTable table(2);
    table.insert("a", {1.0, 0.0});
    table.insert("b", {0.0, 2.0});
    const std::vector<std::string> ab{"a", "b"};
    const auto v = embed_document(ab, table);
    CHECK(v(0) == 1.0);
    CHECK(v(1) == 2.0);

    const auto empty = embed_document(std::vector<std::string>{}, table);
    CHECK(empty.size() == 2);
    CHECK(empty.isZero());

    std::size_t skipped = 0;
    const std::vector<std::string> with_unknown{"a", "unk"};
    const auto w = embed_document(with_unknown, table, &skipped);
    CHECK(w(0) == 1.0);
    CHECK(w(1) == 0.0);
    CHECK(skipped == 1);

    CHECK(tokenize("Hello  hello\tWORLD") == std::vector<std::string>{"hello", "hello", "world"});
    CHECK_THROWS_AS(table.insert("c", {1.0}), data_error);
}

TEST_CASE("tabular loading") {
    TempDir dir;
    write_file(dir / "small.csv", "x,y,label\n1,2,a\n3,4,b\n5,6,a\n");
    const Dataset ds = load_tabular(dir / "small.csv", std::string("label"));
    CHECK(ds.size() == 3);
    CHECK(ds.num_classes() == 2);
    CHECK(ds.feature_dim() == 2);
    CHECK(ds.class_names == std::vector<std::string>{"a", "b"});
    CHECK(ds.features(2, 1) == 6.0);

    const Dataset by_index = load_tabular(dir / "small.csv", std::size_t{2});
    CHECK(by_index.features == ds.features);
    CHECK(by_index.labels == ds.labels);

    write_file(dir / "bad.csv", "x,label\n1,a\nfoo,b\n");
    CHECK_THROWS_AS((void)load_tabular(dir / "bad.csv", std::string("label")), data_error);
    CHECK_THROWS_AS((void)load_tabular(dir / "small.csv", std::string("missing")), config_error);
    CHECK_THROWS_AS((void)load_tabular(dir / "absent.csv", std::string("label")), load_error);

    write_file(dir / "quoted.csv", "\"a,b\",label\n1,\"x, y\"\n2,z\n");
    const Dataset quoted = load_tabular(dir / "quoted.csv", std::string("label"));
    CHECK(quoted.class_names.front() == "x, y");
}

TEST_CASE("iris-format file") {
    const Dataset iris = load_tabular(LABELSIFT_TEST_DATA "/iris.csv", std::string("species"));
    CHECK(iris.size() == 150);
    CHECK(iris.feature_dim() == 4);
    CHECK(iris.num_classes() == 3);
    CHECK_NOTHROW(iris.validate());
}

TEST_CASE("tabular round trip is exact") {
    TempDir dir;
    Dataset ds = test::make_dataset({{0.1, -1e-300}, {1.0 / 3.0, 12345.678}, {2.5e10, 0.0}}, {1, 0, 1}, 2);
    write_tabular(ds, dir / "rt.csv");
    const Dataset back = load_tabular(dir / "rt.csv", std::string("label"));
    CHECK(back.features == ds.features);
    CHECK(decode_labels(back.labels) == std::vector<std::size_t>{0, 1, 0});
    CHECK(back.class_names == std::vector<std::string>{"c1", "c0"});
}

TEST_CASE("IDX images") {
    TempDir dir;
    const std::size_t pixels = 2 * 3 * 3;
    write_file(dir / "img", idx_images(2, 3, 3, pixels));
    write_file(dir / "lab", idx_labels({0, 2}));
    const Dataset ds = load_idx_images(dir / "img", dir / "lab");
    CHECK(ds.kind == DataKind::image);
    CHECK(ds.sample_shape == std::vector<std::size_t>{3, 3, 1});
    CHECK(ds.num_classes() == 3);
    CHECK(ds.features(1, 0) == 9.0);

    const Dataset rgb = load_idx_images(dir / "img", dir / "lab", IdxOptions{.replicate_channels = true});
    CHECK(rgb.sample_shape == std::vector<std::size_t>{3, 3, 3});
    CHECK(rgb.features(1, 0) == rgb.features(1, 2));

    write_idx_images(ds, dir / "img2", dir / "lab2");
    const Dataset again = load_idx_images(dir / "img2", dir / "lab2");
    CHECK(again.features == ds.features);
    CHECK(again.labels == ds.labels);

    auto reason = [&](const std::string &images, const std::string &labels) {
        write_file(dir / "i", images);
        write_file(dir / "l", labels);
        try {
            (void)load_idx_images(dir / "i", dir / "l");
        } catch (const load_error &e) {
            return e.reason();
        }
        return load_failure::io;
    };
    CHECK(reason(idx_images(0, 3, 3, 0), idx_labels({})) == load_failure::empty);
    CHECK(reason(idx_images(2, 3, 3, pixels - 1), idx_labels({0, 1})) == load_failure::truncated);
    CHECK(reason(idx_images(2, 3, 3, pixels), idx_labels({0})) == load_failure::count_mismatch);
    CHECK(reason(idx_labels(std::vector<std::uint8_t>(16, 0)), idx_labels({0, 1})) == load_failure::bad_magic);
}

TEST_CASE("IDX count mismatch 100 vs 99") {
    TempDir dir;
    write_file(dir / "img", idx_images(100, 2, 2, 400));
    write_file(dir / "lab", idx_labels(std::vector<std::uint8_t>(99, 1)));
    CHECK_THROWS_AS((void)load_idx_images(dir / "img", dir / "lab"), load_error);
}

TEST_CASE("MNIST-format subset") {
    const Dataset ds = load_idx_images(LABELSIFT_TEST_DATA "/mnist5k/images-idx3-ubyte",
                                       LABELSIFT_TEST_DATA "/mnist5k/labels-idx1-ubyte");
    CHECK(ds.size() == 5000);
    CHECK(ds.sample_shape == std::vector<std::size_t>{28, 28, 1});
    CHECK(ds.num_classes() == 10);
    CHECK_NOTHROW(ds.validate());
}

TEST_CASE("text corpus") {
    TempDir dir;
    std::string vectors = "3 4\n";
    vectors += "hello 1 0 0 0.5\n";
    vectors += "world 0 1 0 0\n";
    vectors += "again 0 0 1 0\n";
    write_file(dir / "emb.txt", vectors);
    write_file(dir / "corpus.txt", "Hello hello\n\nworld unknown\n");
    write_file(dir / "labels.txt", "pos\nneg\npos\n");
    const EmbeddingTable table = load_embeddings(dir / "emb.txt");
    CHECK(table.size() == 3);
    CHECK(table.dimension() == 4);

    const Dataset ds = load_text(dir / "corpus.txt", dir / "labels.txt", table);
    CHECK(ds.kind == DataKind::text);
    CHECK(ds.size() == 3);
    CHECK(ds.feature_dim() == 4);
    CHECK(ds.features(0, 0) == 2.0);
    CHECK(ds.features(0, 3) == 1.0);
    CHECK(ds.features.row(1).isZero());
    CHECK(ds.features(2, 1) == 1.0);
    CHECK(ds.stats.total_tokens == 4);
    CHECK(ds.stats.skipped_tokens == 1);
    CHECK(ds.class_names == std::vector<std::string>{"pos", "neg"});

    write_file(dir / "short.txt", "pos\n");
    CHECK_THROWS_AS((void)load_text(dir / "corpus.txt", dir / "short.txt", table), data_error);

    write_file(dir / "bad_emb.txt", "5 4\nhello 1 0 0 0\n");
    CHECK_THROWS_AS((void)load_embeddings(dir / "bad_emb.txt"), data_error);
}

TEST_CASE("two lines with 300-dimensional embeddings") {
    EmbeddingTable table(300);
    std::vector<double> v(300, 0.25);
    table.insert("word", v);
    TempDir dir;
    write_file(dir / "c.txt", "word word\nword\n");
    write_file(dir / "l.txt", "0\n1\n");
    const Dataset ds = load_text(dir / "c.txt", dir / "l.txt", table);
    CHECK(ds.features.rows() == 2);
    CHECK(ds.features.cols() == 300);
    CHECK(ds.class_names == std::vector<std::string>{"0", "1"});
}

TEST_CASE("integer label strings keep their values") {
    const auto f = labels_from_strings({"3", "0", "3"});
    CHECK(f.indices == std::vector<std::size_t>{3, 0, 3});
    CHECK(f.names.size() == 4);
    const auto g = labels_from_strings({"cat", "dog", "cat"});
    CHECK(g.indices == std::vector<std::size_t>{0, 1, 0});
}

}  // TEST_SUITE
