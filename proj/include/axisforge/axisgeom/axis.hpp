#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "axisforge/axisgeom/diffmean.hpp"
#include "axisforge/numkit/matrix.hpp"
#include "axisforge/repstore/axis_file.hpp"
#include "axisforge/repstore/hsd.hpp"

namespace axisforge::axisgeom {

// Top-k right singular directions of the stacked DiffMean matrix. Row 0 is
// oriented so that high-class states project above low-class states.
struct ConceptAxis {
  numkit::Matrix basis;  // k x D, orthonormal rows
  std::vector<double> singular_values;
  std::size_t source_layers = 0;

  std::size_t k() const noexcept { return basis.rows(); }
  std::size_t dim() const noexcept { return basis.cols(); }
};

// How the k component scores collapse to one scalar.
enum class Reduction {
  kMean,                    // unweighted mean of components (default)
  kSingularValueWeighted,   // sum(s_i * c_i) / sum(s_i)
};

// Throws DataError when k is outside [1, min(L, D)].
ConceptAxis global_axis(const DiffMeanSet& set, std::size_t k);

// Throws DataError on a dimension mismatch.
double project(const ConceptAxis& axis, std::span<const double> h, Reduction r = Reduction::kMean);

// Scores every listed sample (all samples when `samples` is empty) at one layer.
std::vector<double> project_layer(const ConceptAxis& axis, const repstore::HiddenStateDump& dump,
                                  std::size_t layer, std::span<const std::size_t> samples,
                                  Reduction r = Reduction::kMean);

repstore::ConceptAxisFile to_file(const ConceptAxis& axis);
ConceptAxis from_file(const repstore::ConceptAxisFile& file);

}  // namespace axisforge::axisgeom
