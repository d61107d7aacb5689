#include "axisforge/probekit/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/numkit/stats.hpp"
#include "axisforge/parallel.hpp"

namespace axisforge::probekit {

std::string_view protocol_name(Protocol p) {
  return p == Protocol::kHoldout8020 ? "holdout_80_20" : "kfold_10";
}

std::optional<Protocol> parse_protocol(std::string_view s) {
  if (s == "holdout_80_20") return Protocol::kHoldout8020;
  if (s == "kfold_10") return Protocol::kKfold10;
  return std::nullopt;
}

numkit::Matrix layer_features(const repstore::HiddenStateDump& dump, std::size_t layer,
                              std::span<const std::size_t> samples) {
  if (layer >= dump.n_layers()) throw DataError("layer " + std::to_string(layer) + " out of range");
  const std::size_t n = samples.empty() ? dump.n_samples() : samples.size();
  numkit::Matrix x(n, dump.dim());
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = samples.empty() ? r : samples[r];
    if (i >= dump.n_samples()) throw DataError("sample index " + std::to_string(i) + " out of range");
    const auto s = dump.state(layer, i);
    std::copy(s.begin(), s.end(), x.row(r).begin());
  }
  return x;
}

std::vector<double> static_targets(const repstore::HiddenStateDump& dump) {
  std::vector<double> out;
  out.reserve(dump.n_samples());
  for (const auto& m : dump.meta()) {
    if (!m.static_score) throw DataError("sample '" + m.id + "' has no static_score");
    out.push_back(*m.static_score);
  }
  return out;
}

std::vector<std::size_t> canonical_order(const repstore::HiddenStateDump& dump, std::uint64_t seed) {
  std::vector<std::uint64_t> key(dump.n_samples());
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = numkit::hash_string(dump.meta()[i].id, seed);
  std::vector<std::size_t> order(dump.n_samples());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] < key[b];
    return dump.meta()[a].id < dump.meta()[b].id;
  });
  return order;
}

std::vector<std::vector<std::size_t>> make_folds(const repstore::HiddenStateDump& dump, Protocol protocol,
                                                 std::uint64_t seed) {
  const auto order = canonical_order(dump, seed);
  if (protocol == Protocol::kHoldout8020) {
    const auto n_test = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(order.size())));
    return {std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test))};
  }
  std::vector<std::vector<std::size_t>> folds(10);
  for (std::size_t r = 0; r < order.size(); ++r) folds[r % 10].push_back(order[r]);
  return folds;
}

ProbeConfig layer_config(const ProbeConfig& cfg, std::size_t layer) {
  ProbeConfig c = cfg;
  c.seed = cfg.seed ^ static_cast<std::uint64_t>(layer);
  return c;
}

repstore::LayerCurve layer_correlation(const repstore::HiddenStateDump& dump, std::span<const double> targets,
                                       const ProbeConfig& cfg, Protocol protocol) {
  cfg.validate();
  if (targets.size() != dump.n_samples()) throw DataError("every sample needs a target");
  const auto folds = make_folds(dump, protocol, cfg.seed);
  const auto order = canonical_order(dump, cfg.seed);
  for (const auto& f : folds) {
    if (f.size() < 2) throw DataError("test fold has fewer than two samples");
  }

  // Training sets keep canonical order.
  std::vector<std::vector<std::size_t>> train_sets;
  for (const auto& fold : folds) {
    std::vector<bool> held(dump.n_samples(), false);
    for (auto i : fold) held[i] = true;
    std::vector<std::size_t> train;
    for (auto i : order)
      if (!held[i]) train.push_back(i);
    train_sets.push_back(std::move(train));
  }

  repstore::LayerCurve curve;
  curve.metric = repstore::Metric::kPearson;
  curve.values.resize(dump.n_layers());
  parallel_for(dump.n_layers(), [&](std::size_t layer) {
    const ProbeConfig lc = layer_config(cfg, layer);
    double sum = 0.0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      ProbeConfig fc = lc;
      fc.seed = numkit::derive_seed(lc.seed, f);
      std::vector<double> y_train, y_test;
      for (auto i : train_sets[f]) y_train.push_back(targets[i]);
      for (auto i : folds[f]) y_test.push_back(targets[i]);
      const auto x_train = layer_features(dump, layer, train_sets[f]);
      const auto x_test = layer_features(dump, layer, folds[f]);
      const auto model = train_probe(x_train, y_train, fc, &x_test);
      sum += numkit::pearson(model.validation_predictions, y_test);
    }
    curve.values[layer] = sum / static_cast<double>(folds.size());
  });
  return curve;
}

std::vector<ProbeModel> train_layer_probes(const repstore::HiddenStateDump& dump,
                                           std::span<const double> targets, const ProbeConfig& cfg) {
  cfg.validate();
  if (targets.size() != dump.n_samples()) throw DataError("every sample needs a target");
  const auto order = canonical_order(dump, cfg.seed);
  std::vector<double> y;
  for (auto i : order) y.push_back(targets[i]);
  std::vector<ProbeModel> probes(dump.n_layers());
  parallel_for(dump.n_layers(), [&](std::size_t layer) {
    probes[layer] = train_probe(layer_features(dump, layer, order), y, layer_config(cfg, layer));
  });
  return probes;
}

}  // namespace axisforge::probekit
