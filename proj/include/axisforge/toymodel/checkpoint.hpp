#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "axisforge/toymodel/model.hpp"

namespace axisforge::toymodel {

// TOY1 layout (little-endian):
//   "TOY1" | u32 version=1 | u32 vocab, d_model, n_layers, n_heads, ffn_dim,
//   context | u64 seed | u64 steps_trained | u64 n_params
//   | u32 crc32(all preceding bytes) | f32 params[n_params]
// Parameters are held at f32 precision, so the round trip is exact.
std::string encode_toy(const ToyModel& model);
ToyModel decode_toy(std::string_view bytes);

void write_toy(const ToyModel& model, const std::filesystem::path& path);
ToyModel read_toy(const std::filesystem::path& path);

}  // namespace axisforge::toymodel
