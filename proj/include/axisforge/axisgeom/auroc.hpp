#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "axisforge/axisgeom/axis.hpp"
#include "axisforge/repstore/curve.hpp"
#include "axisforge/repstore/hsd.hpp"

namespace axisforge::axisgeom {

// Pair counts at or below this use exact pair enumeration; above it, the
// midrank rank-sum route. Both yield the same integer statistic.
inline constexpr std::uint64_t kExactPairLimit = 1'000'000;

// Mann-Whitney AUROC: P(pos > neg) + 0.5 P(pos == neg). Throws DataError on
// an empty set or a non-finite score. auroc(p, n) + auroc(n, p) == 1 exactly.
double auroc(std::span<const double> pos, std::span<const double> neg);

namespace detail {
// Twice the Mann-Whitney U statistic (an integer: wins count 2, ties 1).
std::uint64_t twice_u_pairs(std::span<const double> pos, std::span<const double> neg);
std::uint64_t twice_u_ranksum(std::span<const double> pos, std::span<const double> neg);
// Maps 2U over 2|P||N| to [0,1] such that complements sum to exactly 1.
double ratio(std::uint64_t twice_u, std::uint64_t twice_pairs);
}  // namespace detail

// value[l] = auroc of pos-vs-neg projections at layer l.
repstore::LayerCurve layer_auroc(const ConceptAxis& axis, const repstore::HiddenStateDump& dump,
                                 std::span<const std::size_t> pos, std::span<const std::size_t> neg,
                                 Reduction r = Reduction::kMean);

// Single-layer figurative classification score.
double auroc_at_layer(const ConceptAxis& axis, const repstore::HiddenStateDump& dump,
                      std::size_t layer, std::span<const std::size_t> pos,
                      std::span<const std::size_t> neg, Reduction r = Reduction::kMean);

}  // namespace axisforge::axisgeom
