#include "axisforge/axisgeom/auroc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "axisforge/error.hpp"
#include "axisforge/parallel.hpp"

namespace axisforge::axisgeom {
namespace detail {

std::uint64_t twice_u_pairs(std::span<const double> pos, std::span<const double> neg) {
  std::uint64_t acc = 0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) {
        acc += 2;
      } else if (p == n) {
        acc += 1;
      }
    }
  }
  return acc;
}

std::uint64_t twice_u_ranksum(std::span<const double> pos, std::span<const double> neg) {
  struct Item {
    double v;
    bool positive;
  };
  std::vector<Item> all;
  all.reserve(pos.size() + neg.size());
  for (double p : pos) all.push_back({p, true});
  for (double n : neg) all.push_back({n, false});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.v < b.v; });

  // Ranks are 1-based; a tie block spanning sorted positions [i, j) shares the
  // midrank (i + 1 + j) / 2, so twice the rank is the integer i + 1 + j.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i + 1;
    while (j < all.size() && all[j].v == all[i].v) ++j;
    std::uint64_t pos_in_block = 0;
    for (std::size_t t = i; t < j; ++t) pos_in_block += all[t].positive ? 1 : 0;
    twice_rank_sum += pos_in_block * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t np = pos.size();
  return twice_rank_sum - np * (np + 1);
}

double ratio(std::uint64_t twice_u, std::uint64_t twice_pairs) {
  // Dividing the smaller side and complementing keeps a + (1 - a) == 1 in
  // floating point for the swapped call.
  if (2 * twice_u <= twice_pairs) {
    return static_cast<double>(twice_u) / static_cast<double>(twice_pairs);
  }
  return 1.0 - static_cast<double>(twice_pairs - twice_u) / static_cast<double>(twice_pairs);
}

}  // namespace detail

double auroc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty()) throw DataError("auroc: positive set is empty");
  if (neg.empty()) throw DataError("auroc: negative set is empty");
  for (double v : pos)
    if (!std::isfinite(v)) throw DataError("auroc: non-finite positive score");
  for (double v : neg)
    if (!std::isfinite(v)) throw DataError("auroc: non-finite negative score");
  const std::uint64_t pairs = static_cast<std::uint64_t>(pos.size()) * neg.size();
  const std::uint64_t twice_u =
      pairs <= kExactPairLimit ? detail::twice_u_pairs(pos, neg) : detail::twice_u_ranksum(pos, neg);
  return detail::ratio(twice_u, 2 * pairs);
}

double auroc_at_layer(const ConceptAxis& axis, const repstore::HiddenStateDump& dump,
                      std::size_t layer, std::span<const std::size_t> pos,
                      std::span<const std::size_t> neg, Reduction r) {
  if (pos.empty() || neg.empty()) throw DataError("auroc: empty class index set");
  const auto ps = project_layer(axis, dump, layer, pos, r);
  const auto ns = project_layer(axis, dump, layer, neg, r);
  return auroc(ps, ns);
}

repstore::LayerCurve layer_auroc(const ConceptAxis& axis, const repstore::HiddenStateDump& dump,
                                 std::span<const std::size_t> pos, std::span<const std::size_t> neg,
                                 Reduction r) {
  repstore::LayerCurve curve;
  curve.metric = repstore::Metric::kAuroc;
  curve.values.resize(dump.n_layers());
  parallel_for(dump.n_layers(),
               [&](std::size_t l) { curve.values[l] = auroc_at_layer(axis, dump, l, pos, neg, r); });
  return curve;
}

}  // namespace axisforge::axisgeom
