#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "axisforge/numkit/matrix.hpp"
#include "axisforge/repstore/hsd.hpp"

namespace axisforge::axisgeom {

inline constexpr double kDefaultHighMin = 4.0;
inline constexpr double kDefaultLowMax = 2.0;

struct ClassSplit {
  std::vector<std::size_t> high;
  std::vector<std::size_t> low;
};

// high: static_score >= high_min; low: static_score <= low_max. Samples
// without a score, or strictly between the thresholds, are unused.
// Throws DataError naming the empty side, or when high_min <= low_max.
ClassSplit select_classes(const repstore::HiddenStateDump& dump, double high_min = kDefaultHighMin,
                          double low_max = kDefaultLowMax);

// Mean of the high-class states minus mean of the low-class states at one
// layer. Throws DataError on an empty index set or an out-of-range index.
std::vector<double> diffmean_layer(const repstore::HiddenStateDump& dump, std::size_t layer,
                                   std::span<const std::size_t> high,
                                   std::span<const std::size_t> low);

struct DiffMeanSet {
  numkit::Matrix vectors;  // L x D, row l = DiffMean at layer l
  std::size_t high_count = 0;
  std::size_t low_count = 0;
  double high_min = kDefaultHighMin;
  double low_max = kDefaultLowMax;
};

DiffMeanSet diffmean_all(const repstore::HiddenStateDump& dump, double high_min = kDefaultHighMin,
                         double low_max = kDefaultLowMax);
// Same stack from an explicit split; thresholds are recorded as given.
DiffMeanSet diffmean_all(const repstore::HiddenStateDump& dump, const ClassSplit& split,
                         double high_min = kDefaultHighMin, double low_max = kDefaultLowMax);

}  // namespace axisforge::axisgeom
