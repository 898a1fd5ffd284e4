#include "labelsift/dataset.hpp"
#include "labelsift/detector.hpp"
#include "labelsift/errors.hpp"
#include "labelsift/evaluation.hpp"
#include "labelsift/io.hpp"
#include "labelsift/log.hpp"
#include "labelsift/nn/checkpoint.hpp"
#include "labelsift/noise.hpp"
#include "labelsift/parallel.hpp"
#include "labelsift/report.hpp"
#include "labelsift/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace labelsift;

namespace {

struct DataArgs {
    std::string data;
    std::string labels;
    std::string kind;
    std::string label_column;
    bool no_header = false;
    bool replicate_channels = false;
    std::string embeddings;
};

void add_data_options(CLI::App &cmd, DataArgs &args, bool data_required = true) {
    auto *data = cmd.add_option("--data", args.data, "Features: CSV file, IDX image file or text corpus");
    if (data_required) {
        data->required();
    }
    cmd.add_option("--labels", args.labels, "Label file, one label per line (images, text, or to override CSV labels)");
    cmd.add_option("--kind", args.kind, "numerical, image or text (inferred when omitted)");
    cmd.add_option("--label-column", args.label_column, "CSV label column, by name or 0-based index (default: 'label' or the last column)");
    cmd.add_flag("--no-header,!--header", args.no_header, "The CSV file has no header row");
    cmd.add_flag("--replicate-channels", args.replicate_channels, "Load grey images as three identical channels");
    cmd.add_option("--embeddings", args.embeddings, "Word embeddings in word2vec text format (text data)");
}

bool has_idx_image_magic(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char head[4] = {};
    if (!in.read(reinterpret_cast<char *>(head), 4)) {
        return false;
    }
    const std::uint32_t magic = (std::uint32_t{head[0]} << 24) | (std::uint32_t{head[1]} << 16) |
                                (std::uint32_t{head[2]} << 8) | std::uint32_t{head[3]};
    return magic == idx_images_magic;
}

DataKind infer_kind(const DataArgs &args) {
    if (!args.kind.empty()) {
        return parse_data_kind(args.kind);
    }
    if (!args.embeddings.empty()) {
        return DataKind::text;
    }
    return has_idx_image_magic(args.data) ? DataKind::image : DataKind::numerical;
}

ColumnSelector resolve_label_column(const DataArgs &args) {
    const std::string &col = args.label_column;
    if (!col.empty()) {
        const bool numeric = std::all_of(col.begin(), col.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; });
        if (numeric && (args.no_header || col.size() < 10)) {
            return static_cast<std::size_t>(std::stoull(col));
        }
        return col;
    }
    std::ifstream in(args.data);
    std::string first;
    if (!in || !std::getline(in, first)) {
        throw load_error(load_failure::io, "cannot read '" + args.data + "'");
    }
    if (!first.empty() && first.back() == '\r') {
        first.pop_back();
    }
    const auto fields = split_csv_record(first);
    if (!args.no_header && std::find(fields.begin(), fields.end(), "label") != fields.end()) {
        return std::string("label");
    }
    return fields.empty() ? std::size_t{0} : fields.size() - 1;
}

Dataset load_dataset(const DataArgs &args) {
    const DataKind kind = infer_kind(args);
    Dataset dataset;
    switch (kind) {
    case DataKind::numerical:
        dataset = load_tabular(args.data, resolve_label_column(args), CsvOptions{.has_header = !args.no_header});
        if (!args.labels.empty()) {
            assign_labels(dataset, read_label_lines(args.labels));
        }
        break;
    case DataKind::image:
        if (args.labels.empty()) {
            throw config_error("image data needs --labels");
        }
        dataset = load_idx_images(args.data, args.labels, IdxOptions{.replicate_channels = args.replicate_channels});
        break;
    case DataKind::text: {
        if (args.labels.empty() || args.embeddings.empty()) {
            throw config_error("text data needs --labels and --embeddings");
        }
        const EmbeddingTable table = load_embeddings(args.embeddings);
        dataset = load_text(args.data, args.labels, table);
        if (dataset.stats.total_tokens > 0 && dataset.stats.skipped_tokens > 0) {
            log_info(std::to_string(dataset.stats.skipped_tokens) + " of " + std::to_string(dataset.stats.total_tokens) +
                     " tokens had no embedding");
        }
        break;
    }
    }
    dataset.validate();
    return dataset;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw config_error("--alpha must lie in (0, 1], got " + std::to_string(alpha));
    }
}

void check_mu(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) {
        throw config_error("--mu must lie in (0, 1), got " + std::to_string(mu));
    }
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
    DataArgs data;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::string output = "report.json";
    std::string csv;
    std::string full_scores;
    std::string cv_trace;
    std::string save_model;
    std::size_t threads = 0;
};

int run_detect(const DetectArgs &args) {
    check_alpha(args.alpha);
    const Dataset dataset = load_dataset(args.data);

    DetectorConfig config;
    config.threads = resolve_thread_budget(args.threads);
    if (!args.full_scores.empty()) {
        config.retain_full_scores = true;
    }
    if (!args.cv_trace.empty()) {
        config.on_cv_results = [&](std::span<const CvResult> results) { write_cv_trace(results, args.cv_trace); };
    }
    if (!args.save_model.empty()) {
        config.on_model = [&](const TrainedModel &model) { save_model(model, args.save_model); };
    }

    const SuspicionRanking ranking = find_mislabeled(dataset, args.alpha, args.seed, config);
    write_json(ranking_report(ranking, dataset), args.output);
    if (!args.csv.empty()) {
        write_ranking_csv(ranking, dataset, args.csv);
    }
    if (!args.full_scores.empty() && ranking.full_scores) {
        write_json(nlohmann::json(*ranking.full_scores), args.full_scores);
    }

    const auto labels = decode_labels(dataset.labels);
    std::cout << "selected hyperparameters: " << describe(ranking.hyperparams) << '\n';
    std::cout << ranking.suspects.size() << " suspects of " << ranking.n << " instances (alpha=" << ranking.alpha
              << "), " << format_runtime(ranking.runtime_seconds) << '\n';
    std::cout << "rank  index       score  label\n";
    const std::size_t shown = std::min<std::size_t>(10, ranking.suspects.size());
    for (std::size_t r = 0; r < shown; ++r) {
        const auto &s = ranking.suspects[r];
        char line[96];
        std::snprintf(line, sizeof line, "%4zu  %5zu  %10.6f  ", r + 1, s.index, s.score);
        std::cout << line << dataset.class_name(labels[s.index]) << '\n';
    }
    std::cout << "report written to " << args.output << '\n';
    return 0;
}

// ---------------------------------------------------------------- inject

struct InjectArgs {
    DataArgs data;
    double mu = 0.0;
    std::string regime = "completely-at-random";
    std::string groups;
    std::uint64_t seed = 0;
    std::string output = "noisy_labels.txt";
    std::string record = "noise_record.json";
};

int run_inject(const InjectArgs &args) {
    check_mu(args.mu);
    const NoiseRegime regime = parse_noise_regime(args.regime);
    if (regime == NoiseRegime::at_random && args.groups.empty()) {
        throw config_error("--regime at-random needs --groups");
    }
    if (args.data.data.empty() && args.data.labels.empty()) {
        throw config_error("inject needs --labels or --data");
    }

    LabelMatrix labels;
    std::vector<std::string> names;
    if (args.data.data.empty()) {
        const auto parsed = labels_from_strings(read_label_lines(args.data.labels));
        if (parsed.names.size() < 2) {
            throw data_error("the label file holds fewer than two classes");
        }
        labels = one_hot_encode(std::span<const std::size_t>(parsed.indices), parsed.names.size());
        names = parsed.names;
    } else {
        const Dataset dataset = load_dataset(args.data);
        labels = dataset.labels;
        for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
            names.push_back(dataset.class_name(c));
        }
    }

    auto [noisy, record] = regime == NoiseRegime::at_random
                               ? flip_at_random(labels, args.mu, load_class_groups(args.groups, names), args.seed)
                               : flip_completely_at_random(labels, args.mu, args.seed);

    std::ofstream out(args.output);
    if (!out) {
        throw config_error("cannot write '" + args.output + "'");
    }
    for (const auto label : decode_labels(noisy)) {
        out << names[label] << '\n';
    }
    out.close();
    write_json(to_json(record), args.record);
    std::cout << record.flipped_indices.size() << " of " << labels.rows() << " labels flipped (" << to_string(regime)
              << ", mu=" << args.mu << ")\n"
              << "noisy labels written to " << args.output << ", record to " << args.record << '\n';
    return 0;
}

// ---------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    DataArgs data;
    double mu = 0.03;
    std::vector<double> alphas{0.01, 0.02, 0.03};
    std::size_t runs = 5;
    std::uint64_t seed = 0;
    std::string regime = "completely-at-random";
    std::string groups;
    std::string name;
    std::string output = "benchmark.json";
    std::size_t threads = 0;
};

int run_benchmark(const BenchmarkArgs &args) {
    check_mu(args.mu);
    if (args.runs == 0) {
        throw config_error("--runs must be at least 1");
    }
    if (args.alphas.empty()) {
        throw config_error("--alphas needs at least one value");
    }
    for (const double alpha : args.alphas) {
        check_alpha(alpha);
    }
    const NoiseRegime regime = parse_noise_regime(args.regime);
    if (regime == NoiseRegime::at_random && args.groups.empty()) {
        throw config_error("--regime at-random needs --groups");
    }
    const Dataset dataset = load_dataset(args.data);

    BenchmarkOptions options;
    options.dataset_name = args.name.empty() ? fs::path(args.data.data).stem().string() : args.name;
    options.regime = regime;
    if (!args.groups.empty()) {
        options.groups = load_class_groups(args.groups, dataset.class_names);
    }
    options.detector.threads = resolve_thread_budget(args.threads);
    options.on_run = [&](const RunResult &run) {
        std::cout << "run " << run.run + 1 << '/' << args.runs << ": " << run.flips << " flips, "
                  << describe(run.hyperparams) << ", " << format_runtime(run.runtime_seconds) << std::endl;
    };

    try {
        const EvalReport report = benchmark(dataset, args.mu, args.alphas, args.runs, args.seed, options);
        write_json(to_json(report), args.output);
        std::cout << render_table(report) << "report written to " << args.output << '\n';
    } catch (const benchmark_error &e) {
        write_json(to_json(e.partial()), args.output);
        std::cerr << "partial report with " << e.partial().per_run.size() << " completed runs written to "
                  << args.output << '\n';
        throw;
    }
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string report;
    std::string record;
};

int run_evaluate(const EvaluateArgs &args) {
    const SuspicionRanking ranking = ranking_from_report(read_json(args.report));
    const NoiseRecord record = noise_record_from_json(read_json(args.record));
    const auto recall = alpha_recall(ranking, record);
    std::cout << "alpha=" << ranking.alpha << " reviewed=" << ranking.suspects.size()
              << " flipped=" << record.flipped_indices.size() << '\n'
              << "precision=" << alpha_precision(ranking, record)
              << " recall=" << (recall ? std::to_string(*recall) : std::string("n/a")) << '\n';
    return 0;
}

// ---------------------------------------------------------------- inspect

int run_inspect(const DataArgs &args) {
    const Dataset dataset = load_dataset(args);
    std::cout << "kind: " << to_string(dataset.kind) << '\n'
              << "instances: " << dataset.size() << '\n'
              << "sample shape: " << format_shape(dataset.sample_shape) << '\n'
              << "classes: " << dataset.num_classes() << '\n';
    const auto counts = class_counts(dataset.labels);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        std::cout << "  " << dataset.class_name(c) << ": " << counts[c] << '\n';
    }
    if (dataset.kind == DataKind::text) {
        std::cout << "tokens: " << dataset.stats.total_tokens << " (" << dataset.stats.skipped_tokens
                  << " without embedding)\n";
    }
    if (dataset.kind == DataKind::image && dataset.sample_shape.size() == 3 &&
        std::min(dataset.sample_shape[0], dataset.sample_shape[1]) < nn::conv_min_input_extent()) {
        std::cout << "warning: images smaller than " << nn::conv_min_input_extent() << "x"
                  << nn::conv_min_input_extent() << " cannot be processed\n";
    }
    return 0;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string kind;
    std::optional<std::size_t> n;
    std::optional<std::size_t> d;
    std::optional<std::size_t> c;
    std::uint64_t seed = 0;
    std::string output;
};

int run_generate(const GenerateArgs &args) {
    Dataset dataset;
    if (args.kind == "blobs") {
        BlobsOptions options;
        options.n = args.n.value_or(options.n);
        options.d = args.d.value_or(options.d);
        options.c = args.c.value_or(options.c);
        dataset = make_blobs(options, args.seed);
    } else {
        ClassificationOptions options;
        options.n = args.n.value_or(options.n);
        options.d = args.d.value_or(options.d);
        options.c = args.c.value_or(options.c);
        dataset = make_classification(options, args.seed);
    }
    write_tabular(dataset, args.output);
    std::cout << args.kind << " dataset " << format_shape(std::vector<std::size_t>{dataset.size(), dataset.feature_dim()})
              << " with " << dataset.num_classes() << " classes written to " << args.output << '\n';
    return 0;
}

int exit_status(const char *code) {
    const std::string c = code;
    if (c == "data") {
        return 2;
    }
    if (c == "training") {
        return 3;
    }
    return 1;
}

void report_error(const char *code, const std::string &message) {
    std::string flat = message;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    std::cerr << "error code=" << code << ": " << flat << std::endl;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Rank the instances of a labelled dataset by how likely their label is wrong."};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Progress messages on standard error");

    DetectArgs detect;
    auto *detect_cmd = app.add_subcommand("detect", "Report the floor(alpha*N) most suspicious instances");
    add_data_options(*detect_cmd, detect.data);
    detect_cmd->add_option("--alpha", detect.alpha, "Fraction of the dataset to review, in (0, 1]")->required();
    detect_cmd->add_option("--seed", detect.seed, "Random seed");
    detect_cmd->add_option("-o,--output", detect.output, "JSON report path")->capture_default_str();
    detect_cmd->add_option("--csv", detect.csv, "Also write the suspects as CSV");
    detect_cmd->add_option("--full-scores", detect.full_scores, "Write every instance's score as a JSON array");
    detect_cmd->add_option("--cv-trace", detect.cv_trace, "Write per-fold cross-validation scores as CSV");
    detect_cmd->add_option("--save-model", detect.save_model, "Write the final model checkpoint");
    detect_cmd->add_option("--threads", detect.threads, "Thread budget (0 = all cores)");

    InjectArgs inject;
    auto *inject_cmd = app.add_subcommand("inject", "Flip a fraction of the labels and record the ground truth");
    add_data_options(*inject_cmd, inject.data, false);
    inject_cmd->add_option("--mu", inject.mu, "Fraction of labels to flip, in (0, 1)")->required();
    inject_cmd->add_option("--regime", inject.regime, "completely-at-random or at-random")->capture_default_str();
    inject_cmd->add_option("--groups", inject.groups, "JSON class groups for the at-random regime");
    inject_cmd->add_option("--seed", inject.seed, "Random seed");
    inject_cmd->add_option("-o,--output", inject.output, "Noisy label file")->capture_default_str();
    inject_cmd->add_option("--record", inject.record, "Noise record JSON")->capture_default_str();

    BenchmarkArgs bench;
    auto *bench_cmd = app.add_subcommand("benchmark", "Inject noise, detect and report precision and recall");
    add_data_options(*bench_cmd, bench.data);
    bench_cmd->add_option("--mu", bench.mu, "Fraction of labels to flip per run")->capture_default_str();
    bench_cmd->add_option("--alphas", bench.alphas, "Review fractions")->capture_default_str()->delimiter(',');
    bench_cmd->add_option("--runs", bench.runs, "Number of runs")->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Master seed");
    bench_cmd->add_option("--regime", bench.regime, "completely-at-random or at-random")->capture_default_str();
    bench_cmd->add_option("--groups", bench.groups, "JSON class groups for the at-random regime");
    bench_cmd->add_option("--name", bench.name, "Dataset name in the table (default: file stem)");
    bench_cmd->add_option("-o,--output", bench.output, "Evaluation report JSON")->capture_default_str();
    bench_cmd->add_option("--threads", bench.threads, "Thread budget (0 = all cores)");

    EvaluateArgs evaluate;
    auto *evaluate_cmd = app.add_subcommand("evaluate", "Score a detection report against a noise record");
    evaluate_cmd->add_option("--report", evaluate.report, "Report written by detect")->required();
    evaluate_cmd->add_option("--record", evaluate.record, "Record written by inject")->required();

    DataArgs inspect;
    auto *inspect_cmd = app.add_subcommand("inspect", "Summarize a dataset");
    add_data_options(*inspect_cmd, inspect);

    GenerateArgs generate;
    auto *generate_cmd = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
    generate_cmd->add_option("kind", generate.kind, "blobs or classification")
        ->required()
        ->check(CLI::IsMember({"blobs", "classification"}));
    generate_cmd->add_option("--n", generate.n, "Instances");
    generate_cmd->add_option("--d", generate.d, "Features");
    generate_cmd->add_option("--c", generate.c, "Classes");
    generate_cmd->add_option("--seed", generate.seed, "Random seed");
    generate_cmd->add_option("-o,--output", generate.output, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        report_error("config", e.what());
        return 1;
    }
    set_log_level(verbose ? log_level::info : log_level::warning);

    try {
        if (*detect_cmd) {
            return run_detect(detect);
        }
        if (*inject_cmd) {
            return run_inject(inject);
        }
        if (*bench_cmd) {
            return run_benchmark(bench);
        }
        if (*evaluate_cmd) {
            return run_evaluate(evaluate);
        }
        if (*inspect_cmd) {
            return run_inspect(inspect);
        }
        return run_generate(generate);
    } catch (const error &e) {
        report_error(e.code(), e.what());
        return exit_status(e.code());
    } catch (const std::exception &e) {
        report_error("internal", e.what());
        return 4;
    }
}
