#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "axisforge/numkit/matrix.hpp"

namespace axisforge::probekit {

// Regression probe hyperparameters. The defaults are the reference settings;
// the Adam moments/epsilon are the conventional values.
struct ProbeConfig {
  std::vector<std::size_t> hidden_sizes{512, 256, 128};
  double dropout_rate = 0.20;
  double lr = 1e-5;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t epochs = 50;
  std::size_t batch_size = 15;
  std::uint64_t seed = 0;

  // Throws DataError on out-of-range rates, zero epochs/batch or an empty
  // hidden layer.
  void validate() const;
  bool operator==(const ProbeConfig&) const = default;
};

struct LayerShape {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // W is out x in, row-major
  std::size_t bias_offset = 0;
};

// MLP input -> hidden... -> 1 with ReLU and dropout on hidden layers. All
// parameters live in one flat vector (per layer: W then b).
struct ProbeModel {
  std::size_t input_dim = 0;
  ProbeConfig config;
  std::vector<double> params;
  std::vector<double> loss_trace;  // mean training loss per epoch
  // Predictions on the validation features given to train_probe, computed
  // at the end of training. Not serialized.
  std::vector<double> validation_predictions;

  std::vector<LayerShape> shapes() const;
  bool operator==(const ProbeModel& o) const {
    return input_dim == o.input_dim && config == o.config && params == o.params &&
           loss_trace == o.loss_trace;
  }
};

std::vector<LayerShape> layer_shapes(std::size_t input_dim, std::span<const std::size_t> hidden);
std::size_t parameter_count(std::size_t input_dim, std::span<const std::size_t> hidden);

// Seeded uniform fan-in initialisation: U(-1/sqrt(in), 1/sqrt(in)).
ProbeModel init_probe(std::size_t input_dim, const ProbeConfig& cfg);

// Mini-batch AdamW on mean squared error. Deterministic in (features,
// targets, cfg): seeded init, seeded per-epoch shuffle, seeded inverted
// dropout masks. Throws DataError when N < batch_size or targets are
// non-finite, NumericalError (naming epoch and batch) on a non-finite loss.
ProbeModel train_probe(const numkit::Matrix& features, std::span<const double> targets,
                       const ProbeConfig& cfg, const numkit::Matrix* validation = nullptr);

// Dropout disabled. Throws DataError on a feature-dimension mismatch.
std::vector<double> predict(const ProbeModel& model, const numkit::Matrix& features);
double predict_one(const ProbeModel& model, std::span<const double> x);

// Mean squared error over the rows of `features` with dropout disabled;
// when `grad` is non-empty it receives dLoss/dparams (same layout as params).
double mse_loss(const ProbeModel& model, const numkit::Matrix& features,
                std::span<const double> targets, std::span<double> grad);

}  // namespace axisforge::probekit
