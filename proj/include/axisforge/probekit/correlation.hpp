#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "axisforge/numkit/matrix.hpp"
#include "axisforge/probekit/mlp.hpp"
#include "axisforge/repstore/curve.hpp"
#include "axisforge/repstore/hsd.hpp"

namespace axisforge::probekit {

enum class Protocol { kHoldout8020, kKfold10 };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view s);

// Feature rows for the listed samples (all samples when empty) at one layer.
numkit::Matrix layer_features(const repstore::HiddenStateDump& dump, std::size_t layer,
                              std::span<const std::size_t> samples = {});

// static_score of every sample; throws DataError naming the first sample
// without one.
std::vector<double> static_targets(const repstore::HiddenStateDump& dump);

// Samples ordered by a seeded hash of their ids (ties by id), so that folds
// and training order do not depend on the order samples appear in the dump.
std::vector<std::size_t> canonical_order(const repstore::HiddenStateDump& dump, std::uint64_t seed);

// Evaluation folds over canonical_order: holdout -> one fold holding the
// first round(N/5) canonical samples; kfold_10 -> fold = canonical rank % 10.
std::vector<std::vector<std::size_t>> make_folds(const repstore::HiddenStateDump& dump, Protocol protocol,
                                                 std::uint64_t seed);

// Per-layer probe seed: cfg.seed XOR layer.
ProbeConfig layer_config(const ProbeConfig& cfg, std::size_t layer);

// value[l] = mean test-fold Pearson of probes trained on layer-l features.
repstore::LayerCurve layer_correlation(const repstore::HiddenStateDump& dump, std::span<const double> targets,
                                       const ProbeConfig& cfg, Protocol protocol);

// One probe per layer trained on every sample.
std::vector<ProbeModel> train_layer_probes(const repstore::HiddenStateDump& dump,
                                           std::span<const double> targets, const ProbeConfig& cfg);

}  // namespace axisforge::probekit
