#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "axisforge/steerkit/steer.hpp"
#include "axisforge/toymodel/corpus.hpp"

namespace axisforge::toymodel {

struct ToyConfig {
  std::size_t vocab = 256;
  std::size_t d_model = 64;
  std::size_t n_layers = 4;
  std::size_t n_heads = 4;
  std::size_t ffn_dim = 256;
  std::size_t context = 64;
  std::uint64_t seed = 0;

  // Throws DataError unless d_model % n_heads == 0 and all sizes positive.
  void validate() const;
  bool operator==(const ToyConfig&) const = default;
};

// Offsets of every tensor inside the flat parameter vector.
struct BlockOffsets {
  std::size_t ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w_fc1, b_fc1, w_fc2, b_fc2;
};

struct ParamLayout {
  std::size_t tok_emb = 0, pos_emb = 0;
  std::vector<BlockOffsets> blocks;
  std::size_t lnf_g = 0, lnf_b = 0, w_out = 0, b_out = 0;
  std::size_t total = 0;
};

ParamLayout param_layout(const ToyConfig& cfg);

// Pre-norm decoder-only transformer: token + learned position embeddings,
// blocks of (LayerNorm, causal multi-head attention, residual, LayerNorm,
// GELU MLP, residual), final LayerNorm and an untied output projection.
// Parameters are computed in double and rounded to f32 at rest.
struct ToyModel {
  ToyConfig config;
  std::vector<double> params;
  std::uint64_t steps_trained = 0;
  std::vector<double> loss_trace;  // not serialized

  bool trained() const noexcept { return steps_trained > 0; }
  bool operator==(const ToyModel& o) const {
    return config == o.config && params == o.params && steps_trained == o.steps_trained;
  }
};

ToyModel init_toy(const ToyConfig& cfg);
void round_to_f32(ToyModel& model);

// Adds alpha * direction to the output of block `layer` at every position
// >= start_position.
struct Injection {
  std::size_t layer = 0;
  double alpha = 0.0;
  std::span<const double> direction;
  std::size_t start_position = 0;
};

struct HiddenTensor {
  std::size_t n_layers = 0, length = 0, dim = 0;
  std::vector<double> data;  // layer-major, then position, then dimension

  std::span<const double> at(std::size_t layer, std::size_t pos) const {
    return {data.data() + (layer * length + pos) * dim, dim};
  }
};

struct ForwardOutput {
  std::vector<double> logits;  // T x vocab
  HiddenTensor hidden;         // output of every block, after any injection
};

// Throws DataError for an empty or overlong input, an out-of-vocabulary
// token, or an injection at an invalid layer / with the wrong dimension.
ForwardOutput forward(const ToyModel& model, std::span<const Token> tokens, const Injection* inj = nullptr);
HiddenTensor forward_capture(const ToyModel& model, std::span<const Token> tokens, const Injection* inj = nullptr);

// Mean next-token cross-entropy over positions 0..T-2. Adds
// grad_scale * dLoss/dparams into `grad` when it is non-empty.
double loss_and_grad(const ToyModel& model, std::span<const Token> tokens, double grad_scale,
                     std::span<double> grad);

struct GenerateOptions {
  bool greedy = true;  // argmax, ties to the lowest token id
  std::uint64_t seed = 0;
};

struct GenerationTrace {
  std::vector<Token> tokens;                      // generated continuation
  std::vector<std::vector<double>> next_probs;    // per step, softmax over vocab at the last position
  std::vector<std::vector<double>> final_states;  // per step, last-position output of the final block
};

// Decodes n_tokens with the injection (if any) active on every forward pass.
// Throws DataError when prompt + n_tokens exceeds the context.
GenerationTrace generate_trace(const ToyModel& model, std::span<const Token> prompt, std::size_t n_tokens,
                               const Injection* inj, const GenerateOptions& opts = {});

// Steered continuation using the SteerSpec's layer, alpha, direction and scope.
// Throws DataError for an untrained model, an invalid layer, or a direction
// that is not unit norm.
std::vector<Token> generate_steered(const ToyModel& model, std::span<const Token> prompt,
                                    const steerkit::SteerSpec& spec, std::size_t n_tokens,
                                    const GenerateOptions& opts = {});

}  // namespace axisforge::toymodel
