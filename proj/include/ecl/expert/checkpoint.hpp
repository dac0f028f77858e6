#pragma once
// Per-client personalized checkpoints. Layout (little-endian):
//   magic "FECP" | u32 version | u32 client_id | f64 lambda | u8 scheme |
//   u8 norm_mode | u16 reserved | u32 num_classes | u32 num_experts |
//   groups: per expert u32 size + u32 class ids |
//   u32 num_sections | per section u64 offset + u64 length |
//   section payloads (model checkpoints: retrained global, then experts).
// Offsets are from the start of the file.

#include <filesystem>

#include "ecl/expert/personalize.hpp"

namespace ecl::expert {

inline constexpr std::uint32_t kStateVersion = 1;

std::vector<std::uint8_t> serialize_state(const PersonalizedState& state);
PersonalizedState deserialize_state(std::span<const std::uint8_t> bytes);

void save_state(const PersonalizedState& state, const std::filesystem::path& path);
PersonalizedState load_state(const std::filesystem::path& path);

}  // namespace ecl::expert
