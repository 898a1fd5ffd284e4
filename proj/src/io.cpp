#include "labelsift/io.hpp"

#include "labelsift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace labelsift {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n'; };
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_double(std::string_view text, double &out) {
    text = trim(text);
    if (text.empty()) {
        return false;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

std::ifstream open_input(const std::filesystem::path &path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) {
        throw load_error(load_failure::io, "cannot open '" + path.string() + "'");
    }
    return in;
}

/// Lines of a text file; a trailing newline does not produce an extra empty line.
std::vector<std::string> read_lines(const std::filesystem::path &path) {
    auto in = open_input(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path &path) {
    auto in = open_input(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t> &bytes, std::size_t offset) {
    return (std::uint32_t{bytes[offset]} << 24U) | (std::uint32_t{bytes[offset + 1]} << 16U) |
           (std::uint32_t{bytes[offset + 2]} << 8U) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ostream &out, std::uint32_t value) {
    const char bytes[4] = {static_cast<char>((value >> 24U) & 0xFFU), static_cast<char>((value >> 16U) & 0xFFU),
                           static_cast<char>((value >> 8U) & 0xFFU), static_cast<char>(value & 0xFFU)};
    out.write(bytes, 4);
}

std::string hex32(std::uint32_t value) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "0x%08X", value);
    return buffer;
}

}  // namespace

Factorized factorize(const std::vector<std::string> &values) {
    Factorized out;
    std::unordered_map<std::string, std::size_t> lookup;
    out.indices.reserve(values.size());
    for (const auto &v : values) {
        const auto [it, inserted] = lookup.try_emplace(v, out.names.size());
        if (inserted) {
            out.names.push_back(v);
        }
        out.indices.push_back(it->second);
    }
    return out;
}

Factorized labels_from_strings(const std::vector<std::string> &values) {
    Factorized out;
    out.indices.reserve(values.size());
    std::size_t max_label = 0;
    bool all_integers = !values.empty();
    for (const auto &v : values) {
        std::size_t parsed = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
        if (ec != std::errc{} || ptr != v.data() + v.size() || parsed > 1'000'000) {
            all_integers = false;
            break;
        }
        out.indices.push_back(parsed);
        max_label = std::max(max_label, parsed);
    }
    if (!all_integers) {
        return factorize(values);
    }
    for (std::size_t c = 0; c <= max_label; ++c) {
        out.names.push_back(std::to_string(c));
    }
    return out;
}

std::vector<std::string> split_csv_record(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

Dataset load_tabular(const std::filesystem::path &path, const ColumnSelector &label_column, const CsvOptions &options) {
    const auto lines = read_lines(path);
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (options.has_header) {
        while (first_data < lines.size() && trim(lines[first_data]).empty()) {
            ++first_data;
        }
        if (first_data == lines.size()) {
            throw load_error(load_failure::empty, "'" + path.string() + "' has no header line");
        }
        header = split_csv_record(lines[first_data], options.delimiter);
        for (auto &h : header) {
            h = std::string{trim(h)};
        }
        ++first_data;
    }

    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;
    for (line_no = first_data; line_no < lines.size(); ++line_no) {
        if (trim(lines[line_no]).empty()) {
            continue;
        }
        records.push_back(split_csv_record(lines[line_no], options.delimiter));
        record_lines.push_back(line_no + 1);
    }
    if (records.empty()) {
        throw load_error(load_failure::empty, "'" + path.string() + "' contains no data rows");
    }
    const std::size_t width = options.has_header ? header.size() : records.front().size();

    std::size_t label_index = 0;
    if (const auto *name = std::get_if<std::string>(&label_column)) {
        if (!options.has_header) {
            throw config_error("label column '" + *name + "' selected by name but the CSV has no header");
        }
        const auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) {
            throw config_error("label column '" + *name + "' not found in '" + path.string() + "'");
        }
        label_index = static_cast<std::size_t>(it - header.begin());
    } else {
        label_index = std::get<std::size_t>(label_column);
        if (label_index >= width) {
            throw config_error("label column index " + std::to_string(label_index) + " out of range for " +
                               std::to_string(width) + " columns");
        }
    }
    if (width < 2) {
        throw load_error(load_failure::parse, "'" + path.string() + "' needs at least one feature column and a label");
    }

    const std::size_t n = records.size();
    const std::size_t d = width - 1;
    Dataset dataset;
    dataset.kind = DataKind::numerical;
    dataset.sample_shape = {d};
    dataset.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<std::string> raw_labels;
    raw_labels.reserve(n);
    for (std::size_t row = 0; row < n; ++row) {
        const auto &fields = records[row];
        if (fields.size() != width) {
            throw load_error(load_failure::parse, "'" + path.string() + "' line " + std::to_string(record_lines[row]) +
                                                      ": expected " + std::to_string(width) + " fields, found " +
                                                      std::to_string(fields.size()));
        }
        std::size_t feature = 0;
        for (std::size_t col = 0; col < width; ++col) {
            if (col == label_index) {
                raw_labels.emplace_back(trim(fields[col]));
                continue;
            }
            double value = 0.0;
            if (!parse_double(fields[col], value)) {
                throw load_error(load_failure::parse, "'" + path.string() + "' line " +
                                                          std::to_string(record_lines[row]) + ", column " +
                                                          std::to_string(col) + ": cannot parse '" + fields[col] +
                                                          "' as a number");
            }
            dataset.features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(feature++)) = value;
        }
    }
    auto factorized = factorize(raw_labels);
    dataset.labels = one_hot_encode(std::span<const std::size_t>(factorized.indices), factorized.names.size());
    dataset.class_names = std::move(factorized.names);
    return dataset;
}

void write_tabular(const Dataset &dataset, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw load_error(load_failure::io, "cannot write '" + path.string() + "'");
    }
    for (std::size_t col = 0; col < dataset.feature_dim(); ++col) {
        out << 'f' << col << ',';
    }
    out << "label\n";
    const auto labels = decode_labels(dataset.labels);
    for (std::size_t row = 0; row < dataset.size(); ++row) {
        for (std::size_t col = 0; col < dataset.feature_dim(); ++col) {
            out << format_double(dataset.features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)))
                << ',';
        }
        std::string name = dataset.class_name(labels[row]);
        if (name.find_first_of(",\"") != std::string::npos) {
            std::string quoted = "\"";
            for (const char ch : name) {
                quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            }
            name = quoted + "\"";
        }
        out << name << '\n';
    }
    if (!out) {
        throw load_error(load_failure::io, "failed writing '" + path.string() + "'");
    }
}

Dataset load_idx_images(const std::filesystem::path &images_path, const std::filesystem::path &labels_path,
                        const IdxOptions &options) {
    const auto images = read_bytes(images_path);
    if (images.size() < 16) {
        throw load_error(load_failure::truncated, "'" + images_path.string() + "' is too short for an IDX image header");
    }
    if (const auto magic = read_be32(images, 0); magic != idx_images_magic) {
        throw load_error(load_failure::bad_magic, "'" + images_path.string() + "' has magic " + hex32(magic) +
                                                      ", expected " + hex32(idx_images_magic));
    }
    const std::size_t count = read_be32(images, 4);
    const std::size_t rows = read_be32(images, 8);
    const std::size_t cols = read_be32(images, 12);
    if (count == 0) {
        throw load_error(load_failure::empty, "'" + images_path.string() + "' contains no images");
    }
    const std::size_t pixels = rows * cols;
    if (images.size() - 16 < count * pixels) {
        throw load_error(load_failure::truncated, "'" + images_path.string() + "' payload holds " +
                                                      std::to_string(images.size() - 16) + " bytes, expected " +
                                                      std::to_string(count * pixels));
    }

    const auto labels = read_bytes(labels_path);
    if (labels.size() < 8) {
        throw load_error(load_failure::truncated, "'" + labels_path.string() + "' is too short for an IDX label header");
    }
    if (const auto magic = read_be32(labels, 0); magic != idx_labels_magic) {
        throw load_error(load_failure::bad_magic, "'" + labels_path.string() + "' has magic " + hex32(magic) +
                                                      ", expected " + hex32(idx_labels_magic));
    }
    const std::size_t label_count = read_be32(labels, 4);
    if (label_count != count) {
        throw load_error(load_failure::count_mismatch, std::to_string(count) + " images but " +
                                                           std::to_string(label_count) + " labels");
    }
    if (labels.size() - 8 < label_count) {
        throw load_error(load_failure::truncated, "'" + labels_path.string() + "' payload holds " +
                                                      std::to_string(labels.size() - 8) + " labels, expected " +
                                                      std::to_string(label_count));
    }

    const std::size_t channels = options.replicate_channels ? 3 : 1;
    Dataset dataset;
    dataset.kind = DataKind::image;
    dataset.sample_shape = {rows, cols, channels};
    dataset.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels * channels));
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint8_t *src = images.data() + 16 + i * pixels;
        for (std::size_t p = 0; p < pixels; ++p) {
            for (std::size_t ch = 0; ch < channels; ++ch) {
                dataset.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p * channels + ch)) = src[p];
            }
        }
    }
    std::vector<std::size_t> indices(labels.begin() + 8, labels.begin() + 8 + static_cast<std::ptrdiff_t>(count));
    const std::size_t num_classes = *std::max_element(indices.begin(), indices.end()) + 1;
    dataset.labels = one_hot_encode(std::span<const std::size_t>(indices), num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        dataset.class_names.push_back(std::to_string(c));
    }
    return dataset;
}

void write_idx_images(const Dataset &dataset, const std::filesystem::path &images_path,
                      const std::filesystem::path &labels_path) {
    if (dataset.kind != DataKind::image || dataset.sample_shape.size() != 3 || dataset.sample_shape[2] != 1) {
        throw data_error("IDX export needs a single-channel image dataset");
    }
    std::ofstream images(images_path, std::ios::binary);
    std::ofstream labels(labels_path, std::ios::binary);
    if (!images || !labels) {
        throw load_error(load_failure::io, "cannot write IDX files");
    }
    write_be32(images, idx_images_magic);
    write_be32(images, static_cast<std::uint32_t>(dataset.size()));
    write_be32(images, static_cast<std::uint32_t>(dataset.sample_shape[0]));
    write_be32(images, static_cast<std::uint32_t>(dataset.sample_shape[1]));
    for (Eigen::Index i = 0; i < dataset.features.size(); ++i) {
        const double v = dataset.features.data()[i];
        if (v < 0.0 || v > 255.0 || v != static_cast<double>(static_cast<int>(v))) {
            throw data_error("IDX export needs integer pixel values in [0, 255]");
        }
        images.put(static_cast<char>(static_cast<std::uint8_t>(v)));
    }
    write_be32(labels, idx_labels_magic);
    write_be32(labels, static_cast<std::uint32_t>(dataset.size()));
    for (const std::size_t c : decode_labels(dataset.labels)) {
        if (c > 255) {
            throw data_error("IDX labels must fit in one byte");
        }
        labels.put(static_cast<char>(static_cast<std::uint8_t>(c)));
    }
}

EmbeddingTable load_embeddings(const std::filesystem::path &path) {
    auto in = open_input(path);
    std::string line;
    std::size_t vocab = 0;
    std::size_t dimension = 0;
    if (!std::getline(in, line)) {
        throw load_error(load_failure::empty, "'" + path.string() + "' is empty");
    }
    {
        std::istringstream header(line);
        if (!(header >> vocab >> dimension) || dimension == 0) {
            throw load_error(load_failure::parse, "'" + path.string() +
                                                      "': first line must be '<vocab_size> <dimension>'");
        }
    }
    EmbeddingTable table(dimension);
    std::size_t line_no = 1;
    std::size_t read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        std::vector<double> values;
        values.reserve(dimension);
        std::string item;
        while (fields >> item) {
            double v = 0.0;
            if (!parse_double(item, v)) {
                throw load_error(load_failure::parse, "'" + path.string() + "' line " + std::to_string(line_no) +
                                                          ": cannot parse '" + item + "'");
            }
            values.push_back(v);
        }
        if (values.size() != dimension) {
            throw load_error(load_failure::parse, "'" + path.string() + "' line " + std::to_string(line_no) + ": " +
                                                      std::to_string(values.size()) + " components, expected " +
                                                      std::to_string(dimension));
        }
        table.insert(std::move(token), std::move(values));
        ++read;
    }
    if (read != vocab) {
        throw load_error(load_failure::truncated, "'" + path.string() + "' declares " + std::to_string(vocab) +
                                                      " entries but holds " + std::to_string(read));
    }
    return table;
}

std::vector<std::string> read_label_lines(const std::filesystem::path &path) {
    auto lines = read_lines(path);
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        lines[i] = std::string{trim(lines[i])};
        if (lines[i].empty()) {
            throw load_error(load_failure::parse, "'" + path.string() + "' line " + std::to_string(i + 1) +
                                                      " has an empty label");
        }
    }
    return lines;
}

Dataset load_text(const std::filesystem::path &corpus_path, const std::filesystem::path &labels_path,
                  const EmbeddingTable &table) {
    if (table.empty()) {
        throw data_error("embedding table is empty");
    }
    const auto documents = read_lines(corpus_path);
    const auto raw_labels = read_label_lines(labels_path);
    if (documents.size() != raw_labels.size()) {
        throw load_error(load_failure::count_mismatch, std::to_string(documents.size()) + " documents but " +
                                                           std::to_string(raw_labels.size()) + " labels");
    }
    if (documents.empty()) {
        throw load_error(load_failure::empty, "'" + corpus_path.string() + "' contains no documents");
    }
    Dataset dataset;
    dataset.kind = DataKind::text;
    dataset.sample_shape = {table.dimension()};
    dataset.features.resize(static_cast<Eigen::Index>(documents.size()), static_cast<Eigen::Index>(table.dimension()));
    for (std::size_t i = 0; i < documents.size(); ++i) {
        const auto tokens = tokenize(documents[i]);
        dataset.stats.total_tokens += tokens.size();
        dataset.features.row(static_cast<Eigen::Index>(i)) =
            embed_document(tokens, table, &dataset.stats.skipped_tokens).transpose();
    }
    auto factorized = labels_from_strings(raw_labels);
    dataset.labels = one_hot_encode(std::span<const std::size_t>(factorized.indices), factorized.names.size());
    dataset.class_names = std::move(factorized.names);
    return dataset;
}

void assign_labels(Dataset &dataset, const std::vector<std::string> &labels) {
    if (labels.size() != dataset.size()) {
        throw load_error(load_failure::count_mismatch, std::to_string(dataset.size()) + " instances but " +
                                                           std::to_string(labels.size()) + " labels");
    }
    std::unordered_map<std::string, std::size_t> lookup;
    for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
        lookup.emplace(dataset.class_name(c), c);
    }
    std::vector<std::string> names;
    for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
        names.push_back(dataset.class_name(c));
    }
    std::vector<std::size_t> indices;
    indices.reserve(labels.size());
    for (const auto &label : labels) {
        const auto [it, inserted] = lookup.try_emplace(label, names.size());
        if (inserted) {
            names.push_back(label);
        }
        indices.push_back(it->second);
    }
    dataset.labels = one_hot_encode(std::span<const std::size_t>(indices), names.size());
    dataset.class_names = std::move(names);
}

}  // namespace labelsift
