#include "axisforge/probekit/mlp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::probekit {
namespace {

// Activations and scratch for one sample pass.
struct Workspace {
  std::vector<LayerShape> shapes;
  std::vector<std::vector<double>> pre;   // z per layer
  std::vector<std::vector<double>> post;  // dropout-scaled ReLU output per hidden layer
  std::vector<std::vector<double>> mult;  // dropout multiplier per hidden layer
  std::vector<double> delta, back;

  explicit Workspace(std::vector<LayerShape> s) : shapes(std::move(s)) {
    for (const auto& sh : shapes) {
      pre.emplace_back(sh.out);
      if (&sh != &shapes.back()) {
        post.emplace_back(sh.out);
        mult.emplace_back(sh.out, 1.0);
      }
    }
  }
};

double forward(const std::vector<double>& params, Workspace& ws, const double* x) {
  const double* in = x;
  for (std::size_t l = 0; l < ws.shapes.size(); ++l) {
    const auto& sh = ws.shapes[l];
    auto& z = ws.pre[l];
    simd::matvec(params.data() + sh.weight_offset, params.data() + sh.bias_offset, in, z.data(),
                 sh.out, sh.in);
    if (l + 1 == ws.shapes.size()) break;
    auto& a = ws.post[l];
    const auto& m = ws.mult[l];
    for (std::size_t i = 0; i < sh.out; ++i) a[i] = z[i] > 0.0 ? z[i] * m[i] : 0.0;
    in = a.data();
  }
  return ws.pre.back()[0];
}

// Accumulates d(loss)/d(params) for one sample given d(loss)/d(prediction).
void backward(const std::vector<double>& params, Workspace& ws, const double* x, double dpred,
              double* grad) {
  ws.delta.assign(1, dpred);
  for (std::size_t l = ws.shapes.size(); l-- > 0;) {
    const auto& sh = ws.shapes[l];
    const double* in = l == 0 ? x : ws.post[l - 1].data();
    simd::outer_acc(ws.delta.data(), in, grad + sh.weight_offset, sh.out, sh.in);
    simd::axpy(1.0, ws.delta.data(), grad + sh.bias_offset, sh.out);
    if (l == 0) break;
    ws.back.assign(sh.in, 0.0);
    simd::matvec_t_acc(params.data() + sh.weight_offset, ws.delta.data(), ws.back.data(), sh.out, sh.in);
    const auto& z = ws.pre[l - 1];
    const auto& m = ws.mult[l - 1];
    ws.delta.resize(sh.in);
    for (std::size_t i = 0; i < sh.in; ++i) ws.delta[i] = z[i] > 0.0 ? ws.back[i] * m[i] : 0.0;
  }
}

void check_inputs(const ProbeModel& model, const numkit::Matrix& features) {
  if (features.cols() != model.input_dim) {
    throw DataError("probe expects dim " + std::to_string(model.input_dim) + ", features have " +
                    std::to_string(features.cols()));
  }
}

}  // namespace

void ProbeConfig::validate() const {
  auto rate_ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r < 1.0; };
  if (!rate_ok(dropout_rate)) throw DataError("dropout_rate must be in [0,1)");
  if (!rate_ok(lr) || lr == 0.0) throw DataError("lr must be in (0,1)");
  if (!rate_ok(weight_decay)) throw DataError("weight_decay must be in [0,1)");
  if (!rate_ok(beta1) || !rate_ok(beta2)) throw DataError("Adam betas must be in [0,1)");
  if (!(eps > 0.0)) throw DataError("eps must be positive");
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (batch_size < 1) throw DataError("batch_size must be >= 1");
  if (hidden_sizes.empty()) throw DataError("probe needs at least one hidden layer");
  for (auto h : hidden_sizes)
    if (h == 0) throw DataError("hidden layer of width 0");
}

std::vector<LayerShape> layer_shapes(std::size_t input_dim, std::span<const std::size_t> hidden) {
  std::vector<LayerShape> out;
  std::size_t in = input_dim;
  std::size_t offset = 0;
  auto add = [&](std::size_t width) {
    LayerShape s{in, width, offset, offset + in * width};
    offset = s.bias_offset + width;
    out.push_back(s);
    in = width;
  };
  for (auto h : hidden) add(h);
  add(1);
  return out;
}

std::size_t parameter_count(std::size_t input_dim, std::span<const std::size_t> hidden) {
  const auto s = layer_shapes(input_dim, hidden);
  return s.back().bias_offset + s.back().out;
}

std::vector<LayerShape> ProbeModel::shapes() const { return layer_shapes(input_dim, config.hidden_sizes); }

ProbeModel init_probe(std::size_t input_dim, const ProbeConfig& cfg) {
  cfg.validate();
  if (input_dim == 0) throw DataError("probe input dim must be positive");
  ProbeModel m;
  m.input_dim = input_dim;
  m.config = cfg;
  m.params.resize(parameter_count(input_dim, cfg.hidden_sizes));
  numkit::Rng rng(numkit::derive_seed(cfg.seed, 0x1417));
  for (const auto& sh : m.shapes()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sh.in));
    for (std::size_t i = 0; i < sh.in * sh.out; ++i) m.params[sh.weight_offset + i] = rng.uniform(-bound, bound);
    for (std::size_t i = 0; i < sh.out; ++i) m.params[sh.bias_offset + i] = rng.uniform(-bound, bound);
  }
  return m;
}

ProbeModel train_probe(const numkit::Matrix& features, std::span<const double> targets,
                       const ProbeConfig& cfg, const numkit::Matrix* validation) {
  cfg.validate();
  const std::size_t n = features.rows();
  if (targets.size() != n) throw DataError("targets length differs from feature rows");
  if (n < cfg.batch_size) {
    throw DataError("need at least batch_size=" + std::to_string(cfg.batch_size) + " samples, have " +
                    std::to_string(n));
  }
  for (double t : targets)
    if (!std::isfinite(t)) throw DataError("non-finite training target");
  if (features.first_non_finite() != numkit::Matrix::npos) throw DataError("non-finite training feature");

  ProbeModel model = init_probe(features.cols(), cfg);
  Workspace ws(model.shapes());
  const std::size_t np = model.params.size();
  std::vector<double> grad(np), m1(np, 0.0), m2(np, 0.0);
  numkit::Rng rng(numkit::derive_seed(cfg.seed, 0x5eed));
  const double keep = 1.0 - cfg.dropout_rate;
  const double scale = 1.0 / keep;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_no) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const double inv_b = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t t = start; t < stop; ++t) {
        const std::size_t i = order[t];
        if (cfg.dropout_rate > 0.0) {
          for (auto& mult : ws.mult)
            for (double& v : mult) v = rng.uniform() < keep ? scale : 0.0;
        }
        const double* x = features.row(i).data();
        const double err = forward(model.params, ws, x) - targets[i];
        batch_loss += err * err;
        backward(model.params, ws, x, 2.0 * err * inv_b, grad.data());
      }
      batch_loss *= inv_b;
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("probe training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_no));
      }
      epoch_loss += batch_loss * static_cast<double>(stop - start);
      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      simd::adamw(model.params.data(), grad.data(), m1.data(), m2.data(), np, cfg.lr, cfg.beta1,
                  cfg.beta2, cfg.eps, cfg.weight_decay, bc1, bc2);
    }
    model.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  if (validation) model.validation_predictions = predict(model, *validation);
  return model;
}

double predict_one(const ProbeModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim) {
    throw DataError("probe expects dim " + std::to_string(model.input_dim) + ", got " + std::to_string(x.size()));
  }
  Workspace ws(model.shapes());
  return forward(model.params, ws, x.data());
}

std::vector<double> predict(const ProbeModel& model, const numkit::Matrix& features) {
  check_inputs(model, features);
  Workspace ws(model.shapes());
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = forward(model.params, ws, features.row(i).data());
  return out;
}

double mse_loss(const ProbeModel& model, const numkit::Matrix& features, std::span<const double> targets,
                std::span<double> grad) {
  check_inputs(model, features);
  if (targets.size() != features.rows() || features.rows() == 0) throw DataError("targets/features mismatch");
  if (!grad.empty()) {
    if (grad.size() != model.params.size()) throw DataError("gradient buffer has wrong size");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  Workspace ws(model.shapes());
  const double inv_n = 1.0 / static_cast<double>(features.rows());
  double loss = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double* x = features.row(i).data();
    const double err = forward(model.params, ws, x) - targets[i];
    loss += err * err;
    if (!grad.empty()) backward(model.params, ws, x, 2.0 * err * inv_n, grad.data());
  }
  return loss * inv_n;
}

}  // namespace axisforge::probekit
