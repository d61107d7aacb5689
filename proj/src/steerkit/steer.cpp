#include "axisforge/steerkit/steer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/numkit/stats.hpp"

namespace axisforge::steerkit {

std::string_view scope_name(Scope s) { return s == Scope::kAllPositions ? "all_positions" : "generated_only"; }

std::optional<Scope> parse_scope(std::string_view s) {
  if (s == "all_positions") return Scope::kAllPositions;
  if (s == "generated_only") return Scope::kGeneratedOnly;
  return std::nullopt;
}

void add_offset(std::span<double> h, double alpha, std::span<const double> u) {
  if (alpha == 0.0) return;
  if (std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; })) return;
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = h[i] + alpha * u[i];
}

std::vector<double> apply_offset(std::span<const double> h, const SteerSpec& spec) {
  if (h.size() != spec.direction.size()) {
    throw DataError("steering direction has dim " + std::to_string(spec.direction.size()) + ", state has " +
                    std::to_string(h.size()));
  }
  const double n = numkit::norm2(spec.direction);
  if (std::abs(n - 1.0) > kDirectionNormTolerance) {
    throw DataError("steering direction is not unit norm (" + std::to_string(n) + ")");
  }
  std::vector<double> out(h.begin(), h.end());
  add_offset(out, spec.alpha, spec.direction);
  return out;
}

SteerSpec make_steer_spec(const axisgeom::ConceptAxis& axis, std::size_t layer, double alpha,
                          std::size_t n_layers, Scope scope) {
  if (axis.k() < 1) throw DataError("axis has no components");
  if (layer >= n_layers) {
    throw DataError("steering layer " + std::to_string(layer) + " out of range (model has " +
                    std::to_string(n_layers) + " layers)");
  }
  SteerSpec s;
  s.layer = layer;
  s.alpha = alpha;
  s.direction.assign(axis.basis.row(0).begin(), axis.basis.row(0).end());
  s.scope = scope;
  return s;
}

}  // namespace axisforge::steerkit
