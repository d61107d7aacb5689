#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "axisforge/axisgeom/axis.hpp"

namespace axisforge::steerkit {

enum class Scope { kAllPositions, kGeneratedOnly };

std::string_view scope_name(Scope s);
std::optional<Scope> parse_scope(std::string_view s);

// h' = h + alpha * direction at the output of block `layer`. Positive alpha
// moves toward the high-concrete side of the axis.
struct SteerSpec {
  std::size_t layer = 0;
  double alpha = 0.0;
  std::vector<double> direction;  // unit norm
  Scope scope = Scope::kAllPositions;
};

inline constexpr double kDirectionNormTolerance = 1e-9;

// In-place h += alpha * u. alpha == 0 or an all-zero u leaves h untouched
// bit for bit.
void add_offset(std::span<double> h, double alpha, std::span<const double> u);

// Throws DataError on a dimension mismatch or a direction that is not unit
// norm to 1e-9.
std::vector<double> apply_offset(std::span<const double> h, const SteerSpec& spec);

// Direction is basis row 0 of the axis. Throws DataError when
// layer >= n_layers.
SteerSpec make_steer_spec(const axisgeom::ConceptAxis& axis, std::size_t layer, double alpha,
                          std::size_t n_layers, Scope scope = Scope::kAllPositions);

}  // namespace axisforge::steerkit
