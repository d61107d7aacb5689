#include "axisforge/axisgeom/diffmean.hpp"

#include <string>

#include "axisforge/error.hpp"
#include "axisforge/parallel.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::axisgeom {
namespace {

void class_mean(const repstore::HiddenStateDump& dump, std::size_t layer,
                std::span<const std::size_t> idx, std::vector<double>& out, const char* side) {
  if (idx.empty()) throw DataError(std::string(side) + " class is empty");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i : idx) {
    if (i >= dump.n_samples()) {
      throw DataError(std::string(side) + " index " + std::to_string(i) + " out of range");
    }
    simd::axpy(1.0, dump.state(layer, i).data(), out.data(), out.size());
  }
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (double& x : out) x *= inv;
}

}  // namespace

ClassSplit select_classes(const repstore::HiddenStateDump& dump, double high_min, double low_max) {
  if (!(high_min > low_max)) throw DataError("high_min must exceed low_max so the classes are disjoint");
  ClassSplit split;
  for (std::size_t i = 0; i < dump.n_samples(); ++i) {
    const auto& s = dump.meta()[i].static_score;
    if (!s) continue;
    if (*s >= high_min) {
      split.high.push_back(i);
    } else if (*s <= low_max) {
      split.low.push_back(i);
    }
  }
  if (split.high.empty()) throw DataError("high class is empty (no static_score >= " + std::to_string(high_min) + ")");
  if (split.low.empty()) throw DataError("low class is empty (no static_score <= " + std::to_string(low_max) + ")");
  return split;
}

std::vector<double> diffmean_layer(const repstore::HiddenStateDump& dump, std::size_t layer,
                                   std::span<const std::size_t> high,
                                   std::span<const std::size_t> low) {
  if (layer >= dump.n_layers()) {
    throw DataError("layer " + std::to_string(layer) + " out of range (L=" + std::to_string(dump.n_layers()) + ")");
  }
  std::vector<double> mu_high(dump.dim()), mu_low(dump.dim());
  class_mean(dump, layer, high, mu_high, "high");
  class_mean(dump, layer, low, mu_low, "low");
  for (std::size_t d = 0; d < mu_high.size(); ++d) mu_high[d] -= mu_low[d];
  return mu_high;
}

DiffMeanSet diffmean_all(const repstore::HiddenStateDump& dump, double high_min, double low_max) {
  return diffmean_all(dump, select_classes(dump, high_min, low_max), high_min, low_max);
}

DiffMeanSet diffmean_all(const repstore::HiddenStateDump& dump, const ClassSplit& split,
                         double high_min, double low_max) {
  DiffMeanSet set;
  set.vectors = numkit::Matrix(dump.n_layers(), dump.dim());
  set.high_count = split.high.size();
  set.low_count = split.low.size();
  set.high_min = high_min;
  set.low_max = low_max;
  parallel_for(dump.n_layers(), [&](std::size_t l) {
    const auto w = diffmean_layer(dump, l, split.high, split.low);
    std::copy(w.begin(), w.end(), set.vectors.row(l).begin());
  });
  return set;
}

}  // namespace axisforge::axisgeom
