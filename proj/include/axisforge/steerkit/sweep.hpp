#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "axisforge/steerkit/steer.hpp"
#include "axisforge/toymodel/model.hpp"

namespace axisforge::steerkit {

struct SweepOptions {
  std::size_t n_tokens = 4;
  Scope scope = Scope::kAllPositions;
  bool greedy = true;
  std::uint64_t seed = 0;  // prompt p samples with derive_seed(seed, p)
};

struct SweepResult {
  std::vector<double> alphas;
  std::vector<double> mean_projection;  // final-block state . direction, averaged over steps and prompts
  std::vector<double> register_mass;    // softmax mass on concrete-register tokens, same averaging
  std::size_t samples = 0;              // prompts per alpha
  std::vector<std::vector<std::vector<toymodel::Token>>> continuations;  // [alpha][prompt]
};

// Generates from every prompt once per alpha with the offset active at
// `layer`. Alphas must be strictly ascending. The direction must be unit norm
// or all zero (the latter reproduces unsteered decoding for every alpha).
// Throws DataError for an untrained model, an invalid layer, or bad inputs.
SweepResult sweep_toy(const toymodel::ToyModel& model, const std::vector<std::vector<toymodel::Token>>& prompts,
                      std::size_t layer, std::span<const double> direction, std::span<const double> alphas,
                      const SweepOptions& opts = {});

// alpha,mean_projection,register_mass,n
std::string format_sweep_csv(const SweepResult& r);
void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path);

}  // namespace axisforge::steerkit
