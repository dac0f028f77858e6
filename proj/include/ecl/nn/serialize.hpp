#pragma once
// Binary model checkpoints. Layout (little-endian):
//   magic "FECL" | u32 version | u32 input_dim | u32 num_blocks |
//   u32 width[num_blocks] | u32 num_classes | u64 init_seed |
//   f32 params in declaration order (each block w row-major then b,
//   then classifier w and b).
// The freeze mask is training state and is not persisted; decoded models
// come back fully unfrozen.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ecl/nn/model.hpp"

namespace ecl::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize(const ModelParams& model);
ModelParams deserialize(std::span<const std::uint8_t> bytes);

void save_model(const ModelParams& model, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace ecl::nn
