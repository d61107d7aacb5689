#include "axisforge/toymodel/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::toymodel {

ToyModel train_toy(const ToyConfig& cfg, const RegisterCorpus& corpus, const TrainOptions& opts) {
  if (opts.steps == 0) throw DataError("train_toy needs at least one step");
  if (opts.batch_size == 0) throw DataError("batch size must be positive");
  if (corpus.size() == 0) throw DataError("training corpus is empty");
  ToyModel model = init_toy(cfg);
  const std::size_t n = model.params.size();
  std::vector<double> grad(n), m(n, 0.0), v(n, 0.0);
  numkit::Rng rng(numkit::derive_seed(cfg.seed, 0x7a11));
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::size_t cursor = 0;

  double b1t = 1.0, b2t = 1.0;
  const double scale = 1.0 / static_cast<double>(opts.batch_size);
  for (std::size_t step = 0; step < opts.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t b = 0; b < opts.batch_size; ++b) {
      if (cursor == order.size()) {
        rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      loss += loss_and_grad(model, corpus.sequences[order[cursor++]], scale, grad);
    }
    loss *= scale;
    if (!std::isfinite(loss)) {
      throw NumericalError("toy training diverged at step " + std::to_string(step) + " (loss " +
                           std::to_string(loss) + ")");
    }
    model.loss_trace.push_back(loss);
    b1t *= opts.beta1;
    b2t *= opts.beta2;
    simd::adamw(model.params.data(), grad.data(), m.data(), v.data(), n, opts.lr, opts.beta1, opts.beta2,
                opts.eps, opts.weight_decay, 1.0 - b1t, 1.0 - b2t);
  }
  round_to_f32(model);
  model.steps_trained = opts.steps;
  return model;
}

repstore::HiddenStateDump export_register_dump(const ToyModel& model, const RegisterCorpus& corpus) {
  const std::size_t L = model.config.n_layers, D = model.config.d_model, N = corpus.size();
  if (N == 0) throw DataError("corpus is empty");
  std::vector<repstore::SampleMeta> meta(N);
  std::vector<double> states(L * N * D);
  char id[32];
  for (std::size_t i = 0; i < N; ++i) {
    const auto& seq = corpus.sequences[i];
    if (seq.size() < 2) throw DataError("sequence " + std::to_string(i) + " has no context");
    const std::span<const Token> context(seq.data(), seq.size() - 1);
    const HiddenTensor h = forward_capture(model, context);
    for (std::size_t l = 0; l < L; ++l) {
      const auto s = h.at(l, context.size() - 1);
      std::copy(s.begin(), s.end(), states.begin() + static_cast<std::ptrdiff_t>((l * N + i) * D));
    }
    const bool concrete = corpus.registers[i] == Register::kConcrete;
    std::snprintf(id, sizeof id, "toy-%05zu", i);
    meta[i].id = id;
    meta[i].word = std::string(1, static_cast<char>(seq.back()));
    meta[i].static_score = concrete ? 4.5 : 1.5;
    meta[i].label = concrete ? repstore::Label::kHigh : repstore::Label::kLow;
    meta[i].group = "toy";
  }
  return repstore::HiddenStateDump(L, D, repstore::Dtype::kF32, std::move(meta), std::move(states));
}

}  // namespace axisforge::toymodel
