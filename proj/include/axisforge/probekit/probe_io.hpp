#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "axisforge/probekit/mlp.hpp"

namespace axisforge::probekit {

// PRB1 layout (little-endian):
//   "PRB1" | u32 version=1 | u32 input_dim | u32 n_hidden | u32 hidden[n_hidden]
//   | f64 dropout, lr, weight_decay, beta1, beta2, eps | u32 epochs | u32 batch
//   | u64 seed | u32 trace_len | u64 n_params | u32 crc32(all preceding bytes)
//   | f64 params[n_params] | f64 loss_trace[trace_len]
std::string encode_probe(const ProbeModel& model);
ProbeModel decode_probe(std::string_view bytes);

void write_probe(const ProbeModel& model, const std::filesystem::path& path);
ProbeModel read_probe(const std::filesystem::path& path);

}  // namespace axisforge::probekit
