#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace axisforge::repstore {

enum class Metric { kPearson, kAuroc, kDeltaHigh, kDeltaLow };

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view s);

// One scalar per layer. When layer_norm is absent, writers emit
// layer / (L - 1) (0 for a single layer).
struct LayerCurve {
  Metric metric = Metric::kAuroc;
  std::vector<double> values;
  std::optional<std::vector<double>> layer_norm;
  std::size_t first_layer = 0;  // layer index of values[0]

  std::size_t n_layers() const noexcept { return values.size(); }
  double norm_depth(std::size_t layer) const;

  bool operator==(const LayerCurve&) const = default;
};

// Header `layer,layer_norm,metric,value`, one row per layer of every curve,
// 6 significant digits, LF line endings. Throws DataError on an empty curve.
std::string format_curves_csv(std::span<const LayerCurve> curves);
void write_curve_csv(const LayerCurve& curve, const std::filesystem::path& path);
void write_curves_csv(std::span<const LayerCurve> curves, const std::filesystem::path& path);

// Parses the CSV back into curves grouped by metric in order of first
// appearance. Values carry only the printed precision.
std::vector<LayerCurve> parse_curves_csv(std::string_view text);
std::vector<LayerCurve> read_curves_csv(const std::filesystem::path& path);

}  // namespace axisforge::repstore
