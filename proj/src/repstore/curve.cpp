#include "axisforge/repstore/curve.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "axisforge/error.hpp"
#include "axisforge/repstore/binio.hpp"

namespace axisforge::repstore {
namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("curve csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::size_t parse_layer(const std::string& s, std::size_t line_no) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
    throw DataError("curve csv line " + std::to_string(line_no) + ": bad layer index '" + s + "'");
  }
  return v;
}

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kPearson: return "pearson";
    case Metric::kAuroc: return "auroc";
    case Metric::kDeltaHigh: return "delta_high";
    case Metric::kDeltaLow: return "delta_low";
  }
  return "auroc";
}

std::optional<Metric> parse_metric(std::string_view s) {
  if (s == "pearson") return Metric::kPearson;
  if (s == "auroc") return Metric::kAuroc;
  if (s == "delta_high") return Metric::kDeltaHigh;
  if (s == "delta_low") return Metric::kDeltaLow;
  return std::nullopt;
}

double LayerCurve::norm_depth(std::size_t layer) const {
  if (layer_norm) return (*layer_norm)[layer];
  const std::size_t n = values.size();
  return n > 1 ? static_cast<double>(layer) / static_cast<double>(n - 1) : 0.0;
}

std::string format_curves_csv(std::span<const LayerCurve> curves) {
  if (curves.empty()) throw DataError("no curves to write");
  std::string out = "layer,layer_norm,metric,value\n";
  for (const auto& c : curves) {
    if (c.values.empty()) throw DataError("curve has no layers");
    if (c.layer_norm && c.layer_norm->size() != c.values.size()) {
      throw DataError("layer_norm length differs from values length");
    }
    for (std::size_t l = 0; l < c.values.size(); ++l) {
      out += std::to_string(c.first_layer + l);
      out += ',';
      out += g6(c.norm_depth(l));
      out += ',';
      out += metric_name(c.metric);
      out += ',';
      out += g6(c.values[l]);
      out += '\n';
    }
  }
  return out;
}

void write_curve_csv(const LayerCurve& curve, const std::filesystem::path& path) {
  write_curves_csv(std::span<const LayerCurve>(&curve, 1), path);
}

void write_curves_csv(std::span<const LayerCurve> curves, const std::filesystem::path& path) {
  atomic_write_file(path, format_curves_csv(curves));
}

std::vector<LayerCurve> parse_curves_csv(std::string_view text) {
  std::vector<LayerCurve> curves;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "layer,layer_norm,metric,value") throw DataError("curve csv: unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw DataError("curve csv line " + std::to_string(line_no) + ": expected 4 fields");
    const auto metric = parse_metric(f[2]);
    if (!metric) throw DataError("curve csv line " + std::to_string(line_no) + ": unknown metric '" + f[2] + "'");
    LayerCurve* cur = nullptr;
    for (auto& c : curves)
      if (c.metric == *metric) cur = &c;
    if (!cur) {
      curves.push_back(LayerCurve{*metric, {}, std::vector<double>{}});
      cur = &curves.back();
      cur->first_layer = parse_layer(f[0], line_no);
    }
    if (parse_layer(f[0], line_no) != cur->first_layer + cur->values.size()) {
      throw DataError("curve csv line " + std::to_string(line_no) + ": layers must be consecutive");
    }
    cur->layer_norm->push_back(parse_double(f[1], line_no));
    cur->values.push_back(parse_double(f[3], line_no));
  }
  if (line_no == 0) throw DataError("curve csv: empty input");
  return curves;
}

std::vector<LayerCurve> read_curves_csv(const std::filesystem::path& path) {
  return parse_curves_csv(read_file(path));
}

}  // namespace axisforge::repstore
