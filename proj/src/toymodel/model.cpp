#include "axisforge/toymodel/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/numkit/stats.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::toymodel {
namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInitStd = 0.02;

// ---------------------------------------------------------------------------
// Dense helpers over T rows. Weight rows are walked in the outer loop so each
// row stays in cache across the whole sequence.

// Y[t, :] = W X[t, :] + b;  W is out x in.
void linear_fwd(const double* w, const double* b, const double* x, std::size_t t_len, std::size_t in,
                std::size_t out, double* y) {
  for (std::size_t i = 0; i < out; ++i) {
    const double* wi = w + i * in;
    for (std::size_t t = 0; t < t_len; ++t) y[t * out + i] = b[i] + simd::dot(wi, x + t * in, in);
  }
}

// dW += dY^T X, db += sum_t dY, dX += dY W (dX may be null).
void linear_bwd(const double* w, const double* x, const double* dy, std::size_t t_len, std::size_t in,
                std::size_t out, double* dw, double* db, double* dx) {
  for (std::size_t i = 0; i < out; ++i) {
    const double* wi = w + i * in;
    double* dwi = dw + i * in;
    for (std::size_t t = 0; t < t_len; ++t) {
      const double g = dy[t * out + i];
      if (g == 0.0) continue;
      db[i] += g;
      simd::axpy(g, x + t * in, dwi, in);
      if (dx) simd::axpy(g, wi, dx + t * in, in);
    }
  }
}

void layernorm_fwd(const double* x, const double* g, const double* b, std::size_t t_len, std::size_t d,
                   double* xhat, double* rstd, double* out) {
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* xt = x + t * d;
    double mean = 0.0;
    for (std::size_t i = 0; i < d; ++i) mean += xt[i];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (xt[i] - mean) * (xt[i] - mean);
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + kLnEps);
    rstd[t] = r;
    for (std::size_t i = 0; i < d; ++i) {
      const double xh = (xt[i] - mean) * r;
      xhat[t * d + i] = xh;
      out[t * d + i] = xh * g[i] + b[i];
    }
  }
}

// dx += LN backward of dout; dg, db accumulate.
void layernorm_bwd(const double* xhat, const double* rstd, const double* g, const double* dout,
                   std::size_t t_len, std::size_t d, double* dx, double* dg, double* db) {
  std::vector<double> dxhat(d);
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* xh = xhat + t * d;
    const double* dy = dout + t * d;
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      dxhat[i] = dy[i] * g[i];
      dg[i] += dy[i] * xh[i];
      db[i] += dy[i];
      m1 += dxhat[i];
      m2 += dxhat[i] * xh[i];
    }
    m1 /= static_cast<double>(d);
    m2 /= static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i) dx[t * d + i] += rstd[t] * (dxhat[i] - m1 - xh[i] * m2);
  }
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x))); }

double gelu_grad(double x) {
  const double u = kGeluC * (x + 0.044715 * x * x * x);
  const double th = std::tanh(u);
  return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}

struct BlockCache {
  std::vector<double> x_in, ln1_xhat, ln1_rstd, ln1_out, qkv, att, y, x_mid, ln2_xhat, ln2_rstd, ln2_out, f1,
      act;
};

struct Cache {
  std::size_t t_len = 0;
  std::vector<BlockCache> blocks;
  std::vector<double> x_final, lnf_xhat, lnf_rstd, lnf_out, logits;
  std::vector<double> hidden;  // L x T x D
};

void check_tokens(const ToyConfig& cfg, std::span<const Token> tokens) {
  if (tokens.empty()) throw DataError("toy model input is empty");
  if (tokens.size() > cfg.context) {
    throw DataError("input of " + std::to_string(tokens.size()) + " tokens exceeds context " +
                    std::to_string(cfg.context));
  }
  for (Token t : tokens)
    if (t >= cfg.vocab) throw DataError("token " + std::to_string(t) + " outside vocabulary");
}

void run_forward(const ToyModel& model, std::span<const Token> tokens, const Injection* inj, Cache& c) {
  const auto& cfg = model.config;
  check_tokens(cfg, tokens);
  if (inj) {
    if (inj->layer >= cfg.n_layers) throw DataError("injection layer " + std::to_string(inj->layer) + " out of range");
    if (inj->direction.size() != cfg.d_model) throw DataError("injection direction has wrong dimension");
  }
  const ParamLayout lay = param_layout(cfg);
  const double* p = model.params.data();
  const std::size_t T = tokens.size(), D = cfg.d_model, H = cfg.n_heads, F = cfg.ffn_dim, V = cfg.vocab;
  const std::size_t hd = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  c.t_len = T;
  c.blocks.resize(cfg.n_layers);
  c.hidden.assign(cfg.n_layers * T * D, 0.0);

  std::vector<double> x(T * D);
  for (std::size_t t = 0; t < T; ++t) {
    const double* te = p + lay.tok_emb + tokens[t] * D;
    const double* pe = p + lay.pos_emb + t * D;
    for (std::size_t i = 0; i < D; ++i) x[t * D + i] = te[i] + pe[i];
  }

  std::vector<double> scores(T);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    const auto& o = lay.blocks[l];
    auto& b = c.blocks[l];
    b.x_in = x;
    b.ln1_xhat.resize(T * D);
    b.ln1_rstd.resize(T);
    b.ln1_out.resize(T * D);
    layernorm_fwd(x.data(), p + o.ln1_g, p + o.ln1_b, T, D, b.ln1_xhat.data(), b.ln1_rstd.data(), b.ln1_out.data());
    b.qkv.resize(T * 3 * D);
    linear_fwd(p + o.w_qkv, p + o.b_qkv, b.ln1_out.data(), T, D, 3 * D, b.qkv.data());

    b.att.assign(H * T * T, 0.0);
    b.y.assign(T * D, 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t t = 0; t < T; ++t) {
        const double* q = b.qkv.data() + t * 3 * D + h * hd;
        double mx = -INFINITY;
        for (std::size_t s = 0; s <= t; ++s) {
          const double* k = b.qkv.data() + s * 3 * D + D + h * hd;
          scores[s] = simd::dot(q, k, hd) * scale;
          mx = std::max(mx, scores[s]);
        }
        double z = 0.0;
        for (std::size_t s = 0; s <= t; ++s) {
          scores[s] = std::exp(scores[s] - mx);
          z += scores[s];
        }
        double* a = b.att.data() + (h * T + t) * T;
        double* yt = b.y.data() + t * D + h * hd;
        for (std::size_t s = 0; s <= t; ++s) {
          a[s] = scores[s] / z;
          simd::axpy(a[s], b.qkv.data() + s * 3 * D + 2 * D + h * hd, yt, hd);
        }
      }
    }
    std::vector<double> attn_out(T * D);
    linear_fwd(p + o.w_o, p + o.b_o, b.y.data(), T, D, D, attn_out.data());
    for (std::size_t i = 0; i < T * D; ++i) x[i] += attn_out[i];
    b.x_mid = x;

    b.ln2_xhat.resize(T * D);
    b.ln2_rstd.resize(T);
    b.ln2_out.resize(T * D);
    layernorm_fwd(x.data(), p + o.ln2_g, p + o.ln2_b, T, D, b.ln2_xhat.data(), b.ln2_rstd.data(), b.ln2_out.data());
    b.f1.resize(T * F);
    linear_fwd(p + o.w_fc1, p + o.b_fc1, b.ln2_out.data(), T, D, F, b.f1.data());
    b.act.resize(T * F);
    for (std::size_t i = 0; i < T * F; ++i) b.act[i] = gelu(b.f1[i]);
    std::vector<double> mlp_out(T * D);
    linear_fwd(p + o.w_fc2, p + o.b_fc2, b.act.data(), T, F, D, mlp_out.data());
    for (std::size_t i = 0; i < T * D; ++i) x[i] += mlp_out[i];

    if (inj && inj->layer == l) {
      for (std::size_t t = inj->start_position; t < T; ++t) {
        steerkit::add_offset(std::span<double>(x.data() + t * D, D), inj->alpha, inj->direction);
      }
    }
    std::copy(x.begin(), x.end(), c.hidden.begin() + static_cast<std::ptrdiff_t>(l * T * D));
  }

  c.x_final = x;
  c.lnf_xhat.resize(T * D);
  c.lnf_rstd.resize(T);
  c.lnf_out.resize(T * D);
  layernorm_fwd(x.data(), p + lay.lnf_g, p + lay.lnf_b, T, D, c.lnf_xhat.data(), c.lnf_rstd.data(), c.lnf_out.data());
  c.logits.resize(T * V);
  linear_fwd(p + lay.w_out, p + lay.b_out, c.lnf_out.data(), T, D, V, c.logits.data());
}

void softmax_row(const double* logits, std::size_t n, double* out) {
  const double mx = *std::max_element(logits, logits + n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(logits[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

}  // namespace

void ToyConfig::validate() const {
  if (vocab == 0 || vocab > 256) throw DataError("vocab must be in [1, 256] (byte-level)");
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || ffn_dim == 0 || context == 0) {
    throw DataError("toy config sizes must be positive");
  }
  if (d_model % n_heads != 0) throw DataError("d_model must be divisible by n_heads");
}

ParamLayout param_layout(const ToyConfig& cfg) {
  const std::size_t D = cfg.d_model, F = cfg.ffn_dim, V = cfg.vocab;
  ParamLayout lay;
  std::size_t off = 0;
  auto take = [&](std::size_t n) {
    const std::size_t at = off;
    off += n;
    return at;
  };
  lay.tok_emb = take(V * D);
  lay.pos_emb = take(cfg.context * D);
  for (std::size_t l = 0; l < cfg.n_layers; ++l) {
    BlockOffsets b{};
    b.ln1_g = take(D);
    b.ln1_b = take(D);
    b.w_qkv = take(3 * D * D);
    b.b_qkv = take(3 * D);
    b.w_o = take(D * D);
    b.b_o = take(D);
    b.ln2_g = take(D);
    b.ln2_b = take(D);
    b.w_fc1 = take(F * D);
    b.b_fc1 = take(F);
    b.w_fc2 = take(D * F);
    b.b_fc2 = take(D);
    lay.blocks.push_back(b);
  }
  lay.lnf_g = take(D);
  lay.lnf_b = take(D);
  lay.w_out = take(V * D);
  lay.b_out = take(V);
  lay.total = off;
  return lay;
}

ToyModel init_toy(const ToyConfig& cfg) {
  cfg.validate();
  const ParamLayout lay = param_layout(cfg);
  ToyModel m;
  m.config = cfg;
  m.params.assign(lay.total, 0.0);
  numkit::Rng rng(numkit::derive_seed(cfg.seed, 0x70f));
  const std::size_t D = cfg.d_model, F = cfg.ffn_dim, V = cfg.vocab;
  auto normal = [&](std::size_t at, std::size_t n, double sd) {
    for (std::size_t i = 0; i < n; ++i) m.params[at + i] = sd * rng.normal();
  };
  auto ones = [&](std::size_t at, std::size_t n) { std::fill_n(m.params.begin() + static_cast<std::ptrdiff_t>(at), n, 1.0); };
  const double resid_sd = kInitStd / std::sqrt(2.0 * static_cast<double>(cfg.n_layers));
  normal(lay.tok_emb, V * D, kInitStd);
  normal(lay.pos_emb, cfg.context * D, kInitStd);
  for (const auto& b : lay.blocks) {
    ones(b.ln1_g, D);
    normal(b.w_qkv, 3 * D * D, kInitStd);
    normal(b.w_o, D * D, resid_sd);
    ones(b.ln2_g, D);
    normal(b.w_fc1, F * D, kInitStd);
    normal(b.w_fc2, D * F, resid_sd);
  }
  ones(lay.lnf_g, D);
  normal(lay.w_out, V * D, kInitStd);
  round_to_f32(m);
  return m;
}

void round_to_f32(ToyModel& model) {
  for (double& p : model.params) p = static_cast<double>(static_cast<float>(p));
}

ForwardOutput forward(const ToyModel& model, std::span<const Token> tokens, const Injection* inj) {
  Cache c;
  run_forward(model, tokens, inj, c);
  ForwardOutput out;
  out.logits = std::move(c.logits);
  out.hidden = HiddenTensor{model.config.n_layers, tokens.size(), model.config.d_model, std::move(c.hidden)};
  return out;
}

HiddenTensor forward_capture(const ToyModel& model, std::span<const Token> tokens, const Injection* inj) {
  return forward(model, tokens, inj).hidden;
}

double loss_and_grad(const ToyModel& model, std::span<const Token> tokens, double grad_scale,
                     std::span<double> grad) {
  if (tokens.size() < 2) throw DataError("need at least two tokens for a next-token loss");
  Cache c;
  run_forward(model, tokens, nullptr, c);
  const auto& cfg = model.config;
  const std::size_t T = tokens.size(), D = cfg.d_model, H = cfg.n_heads, F = cfg.ffn_dim, V = cfg.vocab;
  const std::size_t hd = D / H;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const std::size_t n_pred = T - 1;

  std::vector<double> dlogits(T * V, 0.0);
  std::vector<double> probs(V);
  double loss = 0.0;
  for (std::size_t t = 0; t < n_pred; ++t) {
    softmax_row(c.logits.data() + t * V, V, probs.data());
    const Token target = tokens[t + 1];
    loss -= std::log(std::max(probs[target], 1e-300));
    for (std::size_t v = 0; v < V; ++v) dlogits[t * V + v] = probs[v] * grad_scale / static_cast<double>(n_pred);
    dlogits[t * V + target] -= grad_scale / static_cast<double>(n_pred);
  }
  loss /= static_cast<double>(n_pred);
  if (grad.empty()) return loss;
  if (grad.size() != model.params.size()) throw DataError("gradient buffer has wrong size");

  const ParamLayout lay = param_layout(cfg);
  const double* p = model.params.data();
  double* g = grad.data();

  std::vector<double> dlnf(T * D, 0.0);
  linear_bwd(p + lay.w_out, c.lnf_out.data(), dlogits.data(), T, D, V, g + lay.w_out, g + lay.b_out, dlnf.data());
  std::vector<double> dx(T * D, 0.0);
  layernorm_bwd(c.lnf_xhat.data(), c.lnf_rstd.data(), p + lay.lnf_g, dlnf.data(), T, D, dx.data(), g + lay.lnf_g,
                g + lay.lnf_b);

  std::vector<double> dact(T * F), df1(T * F), dln2(T * D), dy(T * D), dqkv(T * 3 * D), dln1(T * D), da(T);
  for (std::size_t l = cfg.n_layers; l-- > 0;) {
    const auto& o = lay.blocks[l];
    const auto& b = c.blocks[l];
    // x_out = x_mid + mlp(x_mid); dx holds dLoss/dx_out and becomes dLoss/dx_mid.
    std::fill(dact.begin(), dact.end(), 0.0);
    linear_bwd(p + o.w_fc2, b.act.data(), dx.data(), T, F, D, g + o.w_fc2, g + o.b_fc2, dact.data());
    for (std::size_t i = 0; i < T * F; ++i) df1[i] = dact[i] * gelu_grad(b.f1[i]);
    std::fill(dln2.begin(), dln2.end(), 0.0);
    linear_bwd(p + o.w_fc1, b.ln2_out.data(), df1.data(), T, D, F, g + o.w_fc1, g + o.b_fc1, dln2.data());
    layernorm_bwd(b.ln2_xhat.data(), b.ln2_rstd.data(), p + o.ln2_g, dln2.data(), T, D, dx.data(), g + o.ln2_g,
                  g + o.ln2_b);

    // x_mid = x_in + attn(x_in); dx becomes dLoss/dx_in.
    std::fill(dy.begin(), dy.end(), 0.0);
    linear_bwd(p + o.w_o, b.y.data(), dx.data(), T, D, D, g + o.w_o, g + o.b_o, dy.data());
    std::fill(dqkv.begin(), dqkv.end(), 0.0);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t t = 0; t < T; ++t) {
        const double* a = b.att.data() + (h * T + t) * T;
        const double* dyt = dy.data() + t * D + h * hd;
        double weighted = 0.0;
        for (std::size_t s = 0; s <= t; ++s) {
          const double* v = b.qkv.data() + s * 3 * D + 2 * D + h * hd;
          da[s] = simd::dot(dyt, v, hd);
          weighted += a[s] * da[s];
          simd::axpy(a[s], dyt, dqkv.data() + s * 3 * D + 2 * D + h * hd, hd);
        }
        const double* q = b.qkv.data() + t * 3 * D + h * hd;
        double* dq = dqkv.data() + t * 3 * D + h * hd;
        for (std::size_t s = 0; s <= t; ++s) {
          const double ds = a[s] * (da[s] - weighted) * scale;
          if (ds == 0.0) continue;
          simd::axpy(ds, b.qkv.data() + s * 3 * D + D + h * hd, dq, hd);
          simd::axpy(ds, q, dqkv.data() + s * 3 * D + D + h * hd, hd);
        }
      }
    }
    std::fill(dln1.begin(), dln1.end(), 0.0);
    linear_bwd(p + o.w_qkv, b.ln1_out.data(), dqkv.data(), T, D, 3 * D, g + o.w_qkv, g + o.b_qkv, dln1.data());
    layernorm_bwd(b.ln1_xhat.data(), b.ln1_rstd.data(), p + o.ln1_g, dln1.data(), T, D, dx.data(), g + o.ln1_g,
                  g + o.ln1_b);
  }

  for (std::size_t t = 0; t < T; ++t) {
    simd::axpy(1.0, dx.data() + t * D, g + lay.tok_emb + tokens[t] * D, D);
    simd::axpy(1.0, dx.data() + t * D, g + lay.pos_emb + t * D, D);
  }
  return loss;
}

GenerationTrace generate_trace(const ToyModel& model, std::span<const Token> prompt, std::size_t n_tokens,
                               const Injection* inj, const GenerateOptions& opts) {
  const auto& cfg = model.config;
  if (prompt.empty()) throw DataError("generation needs a non-empty prompt");
  if (prompt.size() + n_tokens > cfg.context) {
    throw DataError("prompt + continuation exceeds the context of " + std::to_string(cfg.context));
  }
  GenerationTrace trace;
  std::vector<Token> seq(prompt.begin(), prompt.end());
  numkit::Rng rng(opts.seed);
  std::vector<double> probs(cfg.vocab);
  Cache c;
  for (std::size_t step = 0; step < n_tokens; ++step) {
    run_forward(model, seq, inj, c);
    const std::size_t last = seq.size() - 1;
    softmax_row(c.logits.data() + last * cfg.vocab, cfg.vocab, probs.data());
    std::size_t next = 0;
    if (opts.greedy) {
      const double* row = c.logits.data() + last * cfg.vocab;
      for (std::size_t v = 1; v < cfg.vocab; ++v)
        if (row[v] > row[next]) next = v;
    } else {
      const double u = rng.uniform();
      double cum = 0.0;
      next = cfg.vocab - 1;
      for (std::size_t v = 0; v < cfg.vocab; ++v) {
        cum += probs[v];
        if (u < cum) {
          next = v;
          break;
        }
      }
    }
    const std::size_t L = cfg.n_layers, D = cfg.d_model, T = seq.size();
    const auto final_begin = c.hidden.begin() + static_cast<std::ptrdiff_t>(((L - 1) * T + last) * D);
    trace.final_states.emplace_back(final_begin, final_begin + static_cast<std::ptrdiff_t>(D));
    trace.next_probs.push_back(probs);
    trace.tokens.push_back(static_cast<Token>(next));
    seq.push_back(static_cast<Token>(next));
  }
  return trace;
}

std::vector<Token> generate_steered(const ToyModel& model, std::span<const Token> prompt,
                                    const steerkit::SteerSpec& spec, std::size_t n_tokens,
                                    const GenerateOptions& opts) {
  if (!model.trained()) throw DataError("generate_steered needs a trained model");
  if (spec.layer >= model.config.n_layers) {
    throw DataError("steering layer " + std::to_string(spec.layer) + " out of range");
  }
  if (spec.direction.size() != model.config.d_model) throw DataError("steering direction has wrong dimension");
  if (std::abs(numkit::norm2(spec.direction) - 1.0) > steerkit::kDirectionNormTolerance) {
    throw DataError("steering direction is not unit norm");
  }
  Injection inj{spec.layer, spec.alpha, spec.direction,
                spec.scope == steerkit::Scope::kAllPositions ? 0 : prompt.size()};
  return generate_trace(model, prompt, n_tokens, &inj, opts).tokens;
}

}  // namespace axisforge::toymodel
