#include "labelsift/report.hpp"

#include "labelsift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace labelsift {

namespace {

nlohmann::json label_value(const Dataset &dataset, std::size_t label) {
    const std::string name = dataset.class_name(label);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), value);
    if (ec == std::errc{} && ptr == name.data() + name.size()) {
        return value;
    }
    return name;
}

std::string csv_escape(std::string value) {
    if (value.find_first_of(",\"\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (const char ch : value) {
        out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return out + "\"";
}

}  // namespace

nlohmann::json to_json(const Hyperparams &hp) {
    nlohmann::json doc;
    doc["architecture"] = hp.architecture == nn::Architecture::conv ? "conv" : "dense";
    if (hp.architecture == nn::Architecture::dense) {
        doc["depth"] = hp.depth;
        doc["units"] = hp.units;
        doc["dropout"] = hp.dropout;
    }
    doc["learning_rate"] = hp.learning_rate;
    doc["batch_size"] = hp.batch_size;
    doc["max_epochs"] = hp.max_epochs;
    doc["patience"] = hp.patience;
    doc["min_delta"] = hp.min_delta;
    return doc;
}

nlohmann::json ranking_report(const SuspicionRanking &ranking, const Dataset &dataset) {
    nlohmann::json doc;
    doc["alpha"] = ranking.alpha;
    doc["n"] = ranking.n;
    doc["selected_hyperparams"] = to_json(ranking.hyperparams);
    doc["runtime_seconds"] = ranking.runtime_seconds;
    const auto labels = decode_labels(dataset.labels);
    auto suspects = nlohmann::json::array();
    for (const auto &s : ranking.suspects) {
        suspects.push_back({{"index", s.index}, {"score", s.score}, {"original_label", label_value(dataset, labels[s.index])}});
    }
    doc["suspects"] = std::move(suspects);
    return doc;
}

void write_ranking_csv(const SuspicionRanking &ranking, const Dataset &dataset, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw config_error("cannot write '" + path.string() + "'");
    }
    const auto labels = decode_labels(dataset.labels);
    out << "index,score,original_label\n";
    for (const auto &s : ranking.suspects) {
        out << s.index << ',' << nlohmann::json(s.score).dump() << ',' << csv_escape(dataset.class_name(labels[s.index]))
            << '\n';
    }
}

SuspicionRanking ranking_from_report(const nlohmann::json &report) {
    try {
        SuspicionRanking ranking;
        ranking.alpha = report.at("alpha").get<double>();
        ranking.n = report.at("n").get<std::size_t>();
        for (const auto &s : report.at("suspects")) {
            ranking.suspects.push_back({s.at("index").get<std::size_t>(), s.at("score").get<double>()});
        }
        return ranking;
    } catch (const nlohmann::json::exception &e) {
        throw data_error(std::string("malformed detection report: ") + e.what());
    }
}

nlohmann::json to_json(const NoiseRecord &record) {
    return {{"indices", record.flipped_indices},
            {"original_labels", record.original_labels},
            {"new_labels", record.new_labels},
            {"mu", record.mu},
            {"regime", std::string{to_string(record.regime)}},
            {"seed", record.seed}};
}

NoiseRecord noise_record_from_json(const nlohmann::json &doc) {
    try {
        NoiseRecord record;
        record.flipped_indices = doc.at("indices").get<std::vector<std::size_t>>();
        record.original_labels = doc.at("original_labels").get<std::vector<std::size_t>>();
        record.new_labels = doc.at("new_labels").get<std::vector<std::size_t>>();
        record.mu = doc.at("mu").get<double>();
        record.regime = parse_noise_regime(doc.at("regime").get<std::string>());
        record.seed = doc.at("seed").get<std::uint64_t>();
        if (record.original_labels.size() != record.flipped_indices.size() ||
            record.new_labels.size() != record.flipped_indices.size()) {
            throw data_error("noise record arrays differ in length");
        }
        return record;
    } catch (const nlohmann::json::exception &e) {
        throw data_error(std::string("malformed noise record: ") + e.what());
    }
}

nlohmann::json to_json(const EvalReport &report) {
    nlohmann::json doc;
    doc["dataset"] = report.dataset_name;
    doc["n"] = report.n;
    doc["mu"] = report.mu;
    doc["regime"] = std::string{to_string(report.regime)};
    doc["alphas"] = report.alphas;
    doc["runs"] = report.runs;
    doc["completed_runs"] = report.per_run.size();
    doc["mean_precision"] = report.mean_precision;
    doc["mean_recall"] = report.mean_recall;
    doc["total_runtime_seconds"] = report.total_runtime_seconds;
    auto runs = nlohmann::json::array();
    for (const auto &run : report.per_run) {
        nlohmann::json r;
        r["run"] = run.run;
        r["seed"] = run.seed;
        r["flips"] = run.flips;
        r["selected_hyperparams"] = to_json(run.hyperparams);
        r["runtime_seconds"] = run.runtime_seconds;
        auto metrics = nlohmann::json::array();
        for (const auto &m : run.metrics) {
            metrics.push_back({{"alpha", m.alpha},
                               {"review_size", m.review_size},
                               {"precision", m.precision},
                               {"recall", m.recall ? nlohmann::json(*m.recall) : nlohmann::json("n/a")}});
        }
        r["metrics"] = std::move(metrics);
        runs.push_back(std::move(r));
    }
    doc["per_run"] = std::move(runs);
    return doc;
}

void write_json(const nlohmann::json &doc, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw config_error("cannot write '" + path.string() + "'");
    }
    out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open '" + path.string() + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw data_error("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace labelsift
