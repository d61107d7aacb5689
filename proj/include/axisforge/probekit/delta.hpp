#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "axisforge/probekit/mlp.hpp"
#include "axisforge/repstore/curve.hpp"
#include "axisforge/repstore/hsd.hpp"

namespace axisforge::probekit {

struct DeltaReport {
  repstore::LayerCurve delta_high;
  repstore::LayerCurve delta_low;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
};

// Mean of (predicted - static) over the listed samples, summed in list order.
double delta_mean(std::span<const double> predicted, std::span<const double> static_scores,
                  std::span<const std::size_t> samples);

// Curves from precomputed per-layer predictions (predictions[l][i] for every
// sample i of the dump).
DeltaReport delta_from_predictions(const std::vector<std::vector<double>>& predictions,
                                   std::span<const double> static_scores, std::span<const std::size_t> high,
                                   std::span<const std::size_t> low);

// delta_high[l] = mean over `high` of probe_l(h) - C_static, likewise for low.
// Static scores come from the dump metadata; a selected sample without one
// is a DataError.
DeltaReport delta_report(std::span<const ProbeModel> probes, const repstore::HiddenStateDump& dump,
                         std::span<const std::size_t> high, std::span<const std::size_t> low);

DeltaReport delta_report(std::span<const ProbeModel> probes, const repstore::HiddenStateDump& dump,
                         std::span<const double> static_scores, std::span<const std::size_t> high,
                         std::span<const std::size_t> low);

}  // namespace axisforge::probekit
