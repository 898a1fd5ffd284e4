#pragma once

#include "labelsift/dataset.hpp"
#include "labelsift/preprocess.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace labelsift {

/// Label column given either by header name or by 0-based index.
using ColumnSelector = std::variant<std::string, std::size_t>;

struct CsvOptions {
    bool has_header = true;
    char delimiter = ',';
};

/// Reads a CSV file. Every column except the label column must be numeric.
/// Labels are factorized in first-appearance order into `class_names`.
[[nodiscard]] Dataset load_tabular(const std::filesystem::path &path, const ColumnSelector &label_column,
                                   const CsvOptions &options = {});

/// Writes features (shortest round-trip representation) followed by a `label`
/// column holding class names. Reloading with label column "label" reproduces
/// the dataset exactly.
void write_tabular(const Dataset &dataset, const std::filesystem::path &path);

/// Splits one CSV record, honouring double-quoted fields.
[[nodiscard]] std::vector<std::string> split_csv_record(std::string_view line, char delimiter = ',');

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

struct IdxOptions {
    /// Replicate the grey channel into three channels.
    bool replicate_channels = false;
};

[[nodiscard]] Dataset load_idx_images(const std::filesystem::path &images_path,
                                      const std::filesystem::path &labels_path, const IdxOptions &options = {});

/// Writes an image dataset with one channel and pixel values in [0, 255] as an IDX pair.
void write_idx_images(const Dataset &dataset, const std::filesystem::path &images_path,
                      const std::filesystem::path &labels_path);

/// Reads a word2vec text-format embedding file.
[[nodiscard]] EmbeddingTable load_embeddings(const std::filesystem::path &path);

/// One document per line; labels one per line (strings or integers).
[[nodiscard]] Dataset load_text(const std::filesystem::path &corpus_path, const std::filesystem::path &labels_path,
                                const EmbeddingTable &table);

/// Reads a label file with one label per line and returns the raw strings.
[[nodiscard]] std::vector<std::string> read_label_lines(const std::filesystem::path &path);

/// Replaces the labels of `dataset` by the given label strings, factorizing them
/// against the existing class names first (new names are appended).
void assign_labels(Dataset &dataset, const std::vector<std::string> &labels);

/// Factorizes strings in first-appearance order.
struct Factorized {
    std::vector<std::size_t> indices;
    std::vector<std::string> names;
};
[[nodiscard]] Factorized factorize(const std::vector<std::string> &values);

/// Non-negative integer labels map to themselves (class names "0".."max");
/// anything else is factorized.
[[nodiscard]] Factorized labels_from_strings(const std::vector<std::string> &values);

}  // namespace labelsift
