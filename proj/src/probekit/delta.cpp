#include "axisforge/probekit/delta.hpp"

#include <cmath>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/parallel.hpp"
#include "axisforge/probekit/correlation.hpp"

namespace axisforge::probekit {

double delta_mean(std::span<const double> predicted, std::span<const double> static_scores,
                  std::span<const std::size_t> samples) {
  if (samples.empty()) throw DataError("delta over an empty sample set");
  double sum = 0.0;
  for (auto i : samples) {
    if (i >= predicted.size() || i >= static_scores.size()) throw DataError("delta sample index out of range");
    sum += predicted[i] - static_scores[i];
  }
  return sum / static_cast<double>(samples.size());
}

DeltaReport delta_from_predictions(const std::vector<std::vector<double>>& predictions,
                                   std::span<const double> static_scores, std::span<const std::size_t> high,
                                   std::span<const std::size_t> low) {
  if (predictions.empty()) throw DataError("no layers to report");
  for (auto i : high)
    if (i >= static_scores.size() || !std::isfinite(static_scores[i])) throw DataError("missing static score");
  for (auto i : low)
    if (i >= static_scores.size() || !std::isfinite(static_scores[i])) throw DataError("missing static score");
  DeltaReport rep;
  rep.delta_high.metric = repstore::Metric::kDeltaHigh;
  rep.delta_low.metric = repstore::Metric::kDeltaLow;
  rep.n_high = high.size();
  rep.n_low = low.size();
  for (const auto& pred : predictions) {
    rep.delta_high.values.push_back(delta_mean(pred, static_scores, high));
    rep.delta_low.values.push_back(delta_mean(pred, static_scores, low));
  }
  return rep;
}

DeltaReport delta_report(std::span<const ProbeModel> probes, const repstore::HiddenStateDump& dump,
                         std::span<const std::size_t> high, std::span<const std::size_t> low) {
  std::vector<double> scores(dump.n_samples(), std::nan(""));
  auto take = [&](std::span<const std::size_t> idx) {
    for (auto i : idx) {
      if (i >= dump.n_samples()) throw DataError("sample index " + std::to_string(i) + " out of range");
      const auto& s = dump.meta()[i].static_score;
      if (!s) throw DataError("sample '" + dump.meta()[i].id + "' has no static_score");
      scores[i] = *s;
    }
  };
  take(high);
  take(low);
  return delta_report(probes, dump, scores, high, low);
}

DeltaReport delta_report(std::span<const ProbeModel> probes, const repstore::HiddenStateDump& dump,
                         std::span<const double> static_scores, std::span<const std::size_t> high,
                         std::span<const std::size_t> low) {
  if (probes.size() != dump.n_layers()) {
    throw DataError("need one probe per layer: have " + std::to_string(probes.size()) + ", dump has " +
                    std::to_string(dump.n_layers()) + " layers");
  }
  if (static_scores.size() != dump.n_samples()) throw DataError("static score count differs from sample count");
  std::vector<std::vector<double>> predictions(dump.n_layers());
  parallel_for(dump.n_layers(), [&](std::size_t l) {
    predictions[l] = predict(probes[l], layer_features(dump, l));
  });
  return delta_from_predictions(predictions, static_scores, high, low);
}

}  // namespace axisforge::probekit
