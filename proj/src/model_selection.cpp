#include "labelsift/model_selection.hpp"

#include "labelsift/errors.hpp"
#include "labelsift/log.hpp"
#include "labelsift/parallel.hpp"
#include "labelsift/random.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

namespace labelsift {

std::vector<GridPoint> hyperparameter_grid(DataKind kind) {
    std::vector<GridPoint> grid;
    if (kind == DataKind::image) {
        return grid;
    }
    for (const auto depth : grid_depths) {
        for (const auto units : grid_units) {
            for (const auto dropout : grid_dropouts) {
                grid.push_back({depth, units, dropout});
            }
        }
    }
    return grid;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const LabelMatrix &labels, std::size_t k, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(labels.rows());
    if (k < 2) {
        throw config_error("k-fold cross-validation needs k >= 2");
    }
    if (n < k) {
        throw config_error("cannot split " + std::to_string(n) + " instances into " + std::to_string(k) + " folds");
    }
    Rng rng(seed);
    const auto counts = class_counts(labels);
    const bool stratify = std::all_of(counts.begin(), counts.end(), [k](std::size_t c) { return c == 0 || c >= k; });

    std::vector<std::size_t> sequence;
    sequence.reserve(n);
    if (stratify) {
        // Dealing the class-grouped sequence round-robin keeps every class within
        // one instance of its share and every fold within one of n / k.
        std::vector<std::vector<std::size_t>> by_class(counts.size());
        const auto decoded = decode_labels(labels);
        for (std::size_t i = 0; i < n; ++i) {
            by_class[decoded[i]].push_back(i);
        }
        for (auto &members : by_class) {
            shuffle(members.begin(), members.end(), rng);
            sequence.insert(sequence.end(), members.begin(), members.end());
        }
    } else {
        log_warning("some class has fewer than " + std::to_string(k) +
                    " instances; falling back to unstratified folds");
        for (std::size_t i = 0; i < n; ++i) {
            sequence.push_back(i);
        }
        shuffle(sequence.begin(), sequence.end(), rng);
    }
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < n; ++i) {
        folds[i % k].push_back(sequence[i]);
    }
    for (auto &fold : folds) {
        std::sort(fold.begin(), fold.end());
    }
    return folds;
}

double balanced_f_score(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                        std::size_t num_classes) {
    if (truth.size() != predicted.size() || truth.empty()) {
        throw config_error("balanced F-score needs two equally long, non-empty label lists");
    }
    std::vector<std::size_t> tp(num_classes, 0);
    std::vector<std::size_t> fp(num_classes, 0);
    std::vector<std::size_t> fn(num_classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= num_classes || predicted[i] >= num_classes) {
            throw invalid_label_error(i, static_cast<long long>(std::max(truth[i], predicted[i])), num_classes);
        }
        if (truth[i] == predicted[i]) {
            ++tp[truth[i]];
        } else {
            ++fn[truth[i]];
            ++fp[predicted[i]];
        }
    }
    double total = 0.0;
    std::size_t classes = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (tp[c] + fp[c] + fn[c] == 0) {
            continue;
        }
        ++classes;
        // F1 = 2TP / (2TP + FP + FN), equal to 2PR / (P + R) and 0 when TP = 0.
        total += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    }
    return total / static_cast<double>(classes);
}

std::size_t pick_best(std::span<const CvResult> results) {
    if (results.empty()) {
        throw config_error("no cross-validation results to choose from");
    }
    auto better = [](const CvResult &a, const CvResult &b) {
        if (a.mean_score != b.mean_score) {
            return a.mean_score > b.mean_score;
        }
        // smaller model first; higher dropout counts as smaller
        return std::tuple(a.point.depth, a.point.units, -a.point.dropout, a.point_id) <
               std::tuple(b.point.depth, b.point.units, -b.point.dropout, b.point_id);
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (better(results[i], results[best])) {
            best = i;
        }
    }
    return best;
}

SelectionResult select_hyperparameters(const Dataset &dataset, std::uint64_t seed, const SelectionOptions &options) {
    SelectionResult selection;
    if (dataset.kind == DataKind::image) {
        selection.best = Hyperparams::conv();
        selection.best.learning_rate = options.base.learning_rate;
        selection.best.max_epochs = options.base.max_epochs;
        selection.best.batch_size = options.base.batch_size;
        selection.best.patience = options.base.patience;
        selection.best.min_delta = options.base.min_delta;
        selection.best.seed = seed;
        return selection;
    }

    const auto grid = hyperparameter_grid(dataset.kind);
    const auto folds = stratified_kfold(dataset.labels, options.folds, derive_seed(seed, {0}));
    const std::size_t k = folds.size();

    std::vector<Dataset> train_sets(k);
    std::vector<Dataset> test_sets(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train_rows;
        for (std::size_t g = 0; g < k; ++g) {
            if (g != f) {
                train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
            }
        }
        std::sort(train_rows.begin(), train_rows.end());
        train_sets[f] = subset(dataset, train_rows);
        test_sets[f] = subset(dataset, folds[f]);
    }

    std::vector<double> scores(grid.size() * k, 0.0);
    std::vector<char> failed(grid.size() * k, 0);
    parallel_for(grid.size() * k, options.threads, [&](std::size_t task) {
        const std::size_t point = task / k;
        const std::size_t fold = task % k;
        Hyperparams hp = options.base;
        hp.architecture = nn::Architecture::dense;
        hp.depth = grid[point].depth;
        hp.units = grid[point].units;
        hp.dropout = grid[point].dropout;
        hp.max_epochs = std::min(options.cv_max_epochs, options.base.max_epochs);
        hp.seed = derive_seed(seed, {1, point, fold});
        try {
            const auto model = fit_dense(train_sets[fold], hp);
            const auto probs = model.predict_proba(test_sets[fold].features);
            const auto truth = decode_labels(test_sets[fold].labels);
            std::vector<std::size_t> predicted(truth.size());
            for (Eigen::Index r = 0; r < probs.rows(); ++r) {
                Eigen::Index best = 0;
                probs.row(r).maxCoeff(&best);
                predicted[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
            }
            scores[task] = balanced_f_score(truth, predicted, dataset.num_classes());
        } catch (const training_error &e) {
            failed[task] = 1;
            log_warning("grid point " + std::to_string(point) + " fold " + std::to_string(fold) +
                        " failed: " + e.what());
        }
    });

    for (std::size_t point = 0; point < grid.size(); ++point) {
        CvResult result;
        result.point_id = point;
        result.point = grid[point];
        double total = 0.0;
        for (std::size_t fold = 0; fold < k; ++fold) {
            result.failed = result.failed || failed[point * k + fold] != 0;
            result.fold_scores.push_back(scores[point * k + fold]);
            total += scores[point * k + fold];
        }
        result.mean_score = result.failed ? 0.0 : total / static_cast<double>(k);
        selection.results.push_back(std::move(result));
    }
    selection.training_runs = grid.size() * k;

    const auto &winner = selection.results[pick_best(selection.results)];
    selection.best = options.base;
    selection.best.architecture = nn::Architecture::dense;
    selection.best.depth = winner.point.depth;
    selection.best.units = winner.point.units;
    selection.best.dropout = winner.point.dropout;
    selection.best.seed = seed;
    return selection;
}

void write_cv_trace(std::span<const CvResult> results, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw config_error("cannot write CV trace '" + path.string() + "'");
    }
    out << "point_id,depth,units,dropout,fold,f_score,mean_f_score\n";
    for (const auto &r : results) {
        for (std::size_t fold = 0; fold < r.fold_scores.size(); ++fold) {
            out << r.point_id << ',' << r.point.depth << ',' << r.point.units << ',' << r.point.dropout << ','
                << fold << ',' << r.fold_scores[fold] << ',' << r.mean_score << '\n';
        }
    }
}

}  // namespace labelsift
