#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "axisforge/numkit/matrix.hpp"

namespace axisforge::repstore {

enum class Orientation : std::uint8_t { kHighPositive = 0 };

// On-disk concept axis (CAX1): k unit-norm basis rows over a D-dim space,
// derived from L_source layers.
struct ConceptAxisFile {
  std::uint32_t source_layers = 0;
  std::vector<double> singular_values;  // length k
  numkit::Matrix basis;                 // k x D
  Orientation orientation = Orientation::kHighPositive;

  std::size_t k() const noexcept { return basis.rows(); }
  std::size_t dim() const noexcept { return basis.cols(); }

  bool operator==(const ConceptAxisFile&) const = default;
};

inline constexpr std::size_t kCaxHeaderSize = 24;
inline constexpr double kUnitNormTolerance = 1e-9;

// Both directions enforce: k >= 1, D >= 1, k <= min(L_source, D), finite
// values, basis rows unit norm to 1e-9.
std::string encode_axis(const ConceptAxisFile& axis);
ConceptAxisFile decode_axis(std::string_view bytes);

void write_axis(const ConceptAxisFile& axis, const std::filesystem::path& path);
ConceptAxisFile read_axis(const std::filesystem::path& path);

}  // namespace axisforge::repstore
