#include "axisforge/axisgeom/axis.hpp"

#include <algorithm>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/numkit/svd.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::axisgeom {

ConceptAxis global_axis(const DiffMeanSet& set, std::size_t k) {
  const auto& w = set.vectors;
  const std::size_t kmax = std::min(w.rows(), w.cols());
  if (k < 1 || k > kmax) {
    throw DataError("k=" + std::to_string(k) + " outside [1, " + std::to_string(kmax) + "]");
  }
  const auto svd = numkit::thin_svd(w);

  ConceptAxis axis;
  axis.basis = numkit::Matrix(k, w.cols());
  axis.singular_values.assign(svd.s.begin(), svd.s.begin() + static_cast<std::ptrdiff_t>(k));
  axis.source_layers = w.rows();
  for (std::size_t r = 0; r < k; ++r) {
    std::copy(svd.vt.row(r).begin(), svd.vt.row(r).end(), axis.basis.row(r).begin());
  }

  // Each DiffMean row is mu_high - mu_low, so the summed dot products equal
  // the layer-summed gap between class-mean projections on component 0.
  double gap = 0.0;
  auto b0 = axis.basis.row(0);
  for (std::size_t l = 0; l < w.rows(); ++l) gap += simd::dot(b0.data(), w.row(l).data(), w.cols());
  if (gap < 0.0) {
    for (double& x : b0) x = -x;
  }
  return axis;
}

double project(const ConceptAxis& axis, std::span<const double> h, Reduction r) {
  if (h.size() != axis.dim()) {
    throw DataError("project: state has dim " + std::to_string(h.size()) + ", axis has " +
                    std::to_string(axis.dim()));
  }
  if (axis.k() == 1) return simd::dot(axis.basis.row(0).data(), h.data(), h.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < axis.k(); ++i) {
    const double c = simd::dot(axis.basis.row(i).data(), h.data(), h.size());
    const double weight = r == Reduction::kMean ? 1.0 : axis.singular_values[i];
    num += weight * c;
    den += weight;
  }
  if (den == 0.0) throw NumericalError("project: all singular-value weights are zero");
  return num / den;
}

std::vector<double> project_layer(const ConceptAxis& axis, const repstore::HiddenStateDump& dump,
                                  std::size_t layer, std::span<const std::size_t> samples,
                                  Reduction r) {
  if (layer >= dump.n_layers()) throw DataError("layer " + std::to_string(layer) + " out of range");
  if (axis.dim() != dump.dim()) {
    throw DataError("axis dim " + std::to_string(axis.dim()) + " != dump dim " + std::to_string(dump.dim()));
  }
  std::vector<double> out;
  if (samples.empty()) {
    out.reserve(dump.n_samples());
    for (std::size_t i = 0; i < dump.n_samples(); ++i) out.push_back(project(axis, dump.state(layer, i), r));
  } else {
    out.reserve(samples.size());
    for (std::size_t i : samples) {
      if (i >= dump.n_samples()) throw DataError("sample index " + std::to_string(i) + " out of range");
      out.push_back(project(axis, dump.state(layer, i), r));
    }
  }
  return out;
}

repstore::ConceptAxisFile to_file(const ConceptAxis& axis) {
  repstore::ConceptAxisFile f;
  f.source_layers = static_cast<std::uint32_t>(axis.source_layers);
  f.singular_values = axis.singular_values;
  f.basis = axis.basis;
  return f;
}

ConceptAxis from_file(const repstore::ConceptAxisFile& file) {
  return ConceptAxis{file.basis, file.singular_values, file.source_layers};
}

}  // namespace axisforge::axisgeom
