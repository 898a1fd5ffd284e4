#pragma once

#include "labelsift/nn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace labelsift {

/// Checkpoint container, all integers and floats little-endian:
///
///   "LSFTCKPT" | u32 version
///   u8 kind | u32 rank | u64 dims[rank] | u64 classes | u64 depth | u64 units | f64 dropout
///   u64 epochs_run | u64 best_epoch | f64 best_accuracy | u8 used_validation_split
///   u32 C | f64 class_weights[C] | u32 E | f64 epoch_losses[E]
///   u32 tensors | { u64 rows | u64 cols | f32 values[rows * cols] }*
inline constexpr std::uint32_t checkpoint_version = 1;

[[nodiscard]] std::vector<std::uint8_t> serialize_model(const TrainedModel &model);
[[nodiscard]] TrainedModel deserialize_model(const std::vector<std::uint8_t> &bytes);

void save_model(const TrainedModel &model, const std::filesystem::path &path);
[[nodiscard]] TrainedModel load_model(const std::filesystem::path &path);

}  // namespace labelsift
