#pragma once

#include <stdexcept>
#include <string>

namespace labelsift {

/// Base of every error raised by the toolkit. `code()` is a short stable tag
/// used by the command line for machine-parseable error lines.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual const char *code() const noexcept = 0;
};

/// Invalid parameters or inconsistent options (exit status 1).
class config_error : public error {
  public:
    using error::error;
    [[nodiscard]] const char *code() const noexcept override { return "config"; }
};

/// Malformed, inconsistent or unusable input data (exit status 2).
class data_error : public error {
  public:
    using error::error;
    [[nodiscard]] const char *code() const noexcept override { return "data"; }
};

/// A label index outside [0, C).
class invalid_label_error : public data_error {
  public:
    invalid_label_error(std::size_t row, long long label, std::size_t num_classes)
        : data_error("invalid label " + std::to_string(label) + " at row " + std::to_string(row) + " (expected 0.." +
                     std::to_string(num_classes == 0 ? 0 : num_classes - 1) + ")"),
          row_{row} {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

enum class load_failure { io, parse, bad_magic, truncated, count_mismatch, empty };

/// Failure while reading one of the supported file formats.
class load_error : public data_error {
  public:
    load_error(load_failure reason, const std::string &what) : data_error(what), reason_{reason} {}
    [[nodiscard]] load_failure reason() const noexcept { return reason_; }

  private:
    load_failure reason_;
};

/// Training could not complete (divergence, impossible configuration at fit time). Exit status 3.
class training_error : public error {
  public:
    using error::error;
    [[nodiscard]] const char *code() const noexcept override { return "training"; }
};

}  // namespace labelsift
