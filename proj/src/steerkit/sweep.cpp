#include "axisforge/steerkit/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/numkit/stats.hpp"
#include "axisforge/parallel.hpp"
#include "axisforge/repstore/binio.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::steerkit {

using toymodel::Token;

SweepResult sweep_toy(const toymodel::ToyModel& model, const std::vector<std::vector<Token>>& prompts,
                      std::size_t layer, std::span<const double> direction, std::span<const double> alphas,
                      const SweepOptions& opts) {
  if (!model.trained()) throw DataError("sweep_toy needs a trained model");
  const auto& cfg = model.config;
  if (layer >= cfg.n_layers) {
    throw DataError("steering layer " + std::to_string(layer) + " out of range (model has " +
                    std::to_string(cfg.n_layers) + " layers)");
  }
  if (direction.size() != cfg.d_model) throw DataError("steering direction has wrong dimension");
  const bool zero = std::all_of(direction.begin(), direction.end(), [](double x) { return x == 0.0; });
  if (!zero && std::abs(numkit::norm2(direction) - 1.0) > kDirectionNormTolerance) {
    throw DataError("steering direction is not unit norm");
  }
  if (alphas.empty()) throw DataError("sweep needs at least one alpha");
  for (std::size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1])) throw DataError("alphas must be strictly ascending");
  if (prompts.empty()) throw DataError("sweep needs at least one prompt");
  if (opts.n_tokens == 0) throw DataError("sweep needs at least one generated token");

  SweepResult res;
  res.alphas.assign(alphas.begin(), alphas.end());
  res.samples = prompts.size();
  res.continuations.assign(alphas.size(), std::vector<std::vector<Token>>(prompts.size()));
  const std::size_t P = prompts.size();
  std::vector<double> proj(alphas.size() * P), mass(alphas.size() * P);

  parallel_for(alphas.size() * P, [&](std::size_t job) {
    const std::size_t a = job / P, p = job % P;
    toymodel::Injection inj{layer, alphas[a], direction,
                            opts.scope == Scope::kAllPositions ? 0 : prompts[p].size()};
    const toymodel::GenerateOptions g{opts.greedy, numkit::derive_seed(opts.seed, p)};
    const auto tr = toymodel::generate_trace(model, prompts[p], opts.n_tokens, &inj, g);
    double sp = 0.0, sm = 0.0;
    for (std::size_t s = 0; s < tr.tokens.size(); ++s) {
      sp += zero ? 0.0 : simd::dot(tr.final_states[s].data(), direction.data(), direction.size());
      for (int t = toymodel::vocab::kConcreteFirst; t <= toymodel::vocab::kConcreteLast; ++t) {
        sm += tr.next_probs[s][static_cast<std::size_t>(t)];
      }
    }
    proj[job] = sp / static_cast<double>(tr.tokens.size());
    mass[job] = sm / static_cast<double>(tr.tokens.size());
    res.continuations[a][p] = tr.tokens;
  });

  for (std::size_t a = 0; a < alphas.size(); ++a) {
    double sp = 0.0, sm = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      sp += proj[a * P + p];
      sm += mass[a * P + p];
    }
    res.mean_projection.push_back(sp / static_cast<double>(P));
    res.register_mass.push_back(sm / static_cast<double>(P));
  }
  return res;
}

std::string format_sweep_csv(const SweepResult& r) {
  std::string out = "alpha,mean_projection,register_mass,n\n";
  char buf[128];
  for (std::size_t i = 0; i < r.alphas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%.6g,%zu\n", r.alphas[i], r.mean_projection[i], r.register_mass[i],
                  r.samples);
    out += buf;
  }
  return out;
}

void write_sweep_csv(const SweepResult& r, const std::filesystem::path& path) {
  repstore::atomic_write_file(path, format_sweep_csv(r));
}

}  // namespace axisforge::steerkit
