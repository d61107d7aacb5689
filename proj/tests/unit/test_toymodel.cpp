#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/repstore/binio.hpp"
#include "axisforge/toymodel/checkpoint.hpp"
#include "axisforge/toymodel/corpus.hpp"
#include "axisforge/toymodel/model.hpp"
#include "axisforge/toymodel/train.hpp"
#include "support/helpers.hpp"

using namespace axisforge;
using namespace axisforge::toymodel;

namespace {

ToyConfig tiny_config(std::uint64_t seed = 3) {
  ToyConfig c;
  c.d_model = 8;
  c.n_layers = 2;
  c.n_heads = 2;
  c.ffn_dim = 16;
  c.context = 24;
  c.seed = seed;
  return c;
}

TrainOptions quick(std::size_t steps = 10) {
  TrainOptions o;
  o.steps = steps;
  o.batch_size = 4;
  return o;
}

}  // namespace

TEST_CASE("corpus is balanced and well formed") {
  const auto c = make_corpus(4, 101);
  REQUIRE(c.size() == 101);
  std::size_t concrete = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& s = c.sequences[i];
    REQUIRE(s.size() == 16);
    CHECK(s[0] == vocab::kBos);
    const bool conc = c.registers[i] == Register::kConcrete;
    concrete += conc;
    std::size_t content = 0;
    for (std::size_t t = 1; t < s.size(); ++t) {
      if (vocab::is_function(s[t])) continue;
      CHECK((conc ? vocab::is_concrete(s[t]) : vocab::is_abstract(s[t])));
      if (t + 1 < s.size()) ++content;
    }
    CHECK(content >= 1);
    CHECK((conc ? vocab::is_concrete(s.back()) : vocab::is_abstract(s.back())));
  }
  CHECK(concrete == 51);
  CHECK_THROWS_AS(make_corpus(1, 1), DataError);
}

TEST_CASE("corpus is seeded") {
  CHECK(make_corpus(9, 20).sequences == make_corpus(9, 20).sequences);
  CHECK(make_corpus(9, 20).sequences != make_corpus(10, 20).sequences);
  for (const auto& p : make_neutral_prompts(2, 30, 7)) {
    REQUIRE(p.size() == 7);
    CHECK(p[0] == vocab::kBos);
    for (std::size_t t = 1; t < p.size(); ++t) CHECK(vocab::is_function(p[t]));
  }
}

TEST_CASE("config validation and parameter layout") {
  ToyConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_heads = 3;
  CHECK_THROWS_AS(c.validate(), DataError);
  const auto lay = param_layout(ToyConfig{});
  // Embeddings, 4 blocks of (2 LN + qkv + proj + 2 ffn), final LN, unembedding.
  const std::size_t d = 64, f = 256, v = 256, T = 64;
  const std::size_t block = 4 * d + 3 * d * d + 3 * d + d * d + d + d * f + f + f * d + d;
  CHECK(lay.total == v * d + T * d + 4 * block + 2 * d + d * v + v);
}

TEST_CASE("forward shapes and validation") {
  const auto m = init_toy(ToyConfig{});
  const std::vector<Token> toks{vocab::kBos, ' ', 'a', '!', 'B'};
  const auto h = forward_capture(m, toks);
  CHECK(h.n_layers == 4);
  CHECK(h.length == 5);
  CHECK(h.dim == 64);
  CHECK(forward(m, toks).logits.size() == 5 * 256);
  const std::vector<Token> overlong(65, ' ');
  CHECK_THROWS_AS(forward(m, overlong), DataError);
  CHECK_THROWS_AS(forward(m, std::vector<Token>{}), DataError);
}

TEST_CASE("zero injection leaves the forward pass unchanged") {
  const auto m = init_toy(tiny_config());
  const std::vector<Token> toks{vocab::kBos, ' ', 'q', '#'};
  const std::vector<double> u{1, 0, 0, 0, 0, 0, 0, 0};
  Injection inj{1, 0.0, u, 0};
  const auto a = forward(m, toks);
  const auto b = forward(m, toks, &inj);
  CHECK(a.logits == b.logits);
  CHECK(a.hidden.data == b.hidden.data);

  inj.alpha = 3.0;
  inj.layer = 0;
  inj.start_position = 2;
  const auto c = forward(m, toks, &inj);
  CHECK(c.hidden.at(0, 1)[0] == a.hidden.at(0, 1)[0]);
  CHECK(c.hidden.at(0, 2)[0] == a.hidden.at(0, 2)[0] + 3.0);
  inj.layer = 2;
  CHECK_THROWS_AS(forward(m, toks, &inj), DataError);
}

TEST_CASE("causal attention ignores the future") {
  const auto m = init_toy(tiny_config());
  const std::vector<Token> a{vocab::kBos, ' ', 'x', '('}, b{vocab::kBos, ' ', 'x', 'Q'};
  const auto ha = forward_capture(m, a), hb = forward_capture(m, b);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t t = 0; t < 3; ++t) {
      const auto x = ha.at(l, t), y = hb.at(l, t);
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
}

TEST_CASE("analytic gradient matches central differences") {
  auto m = init_toy(tiny_config(5));
  // Larger weights than the init so every path carries signal.
  numkit::Rng rng(2);
  for (double& p : m.params) p += 0.1 * rng.normal();
  const std::vector<Token> toks{vocab::kBos, ' ', 'c', '.', 'd', 'e'};
  std::vector<double> grad(m.params.size(), 0.0);
  loss_and_grad(m, toks, 1.0, grad);
  for (int t = 0; t < 40; ++t) {
    const std::size_t k = rng.below(m.params.size());
    const double h = 1e-5, saved = m.params[k];
    m.params[k] = saved + h;
    const double up = loss_and_grad(m, toks, 1.0, {});
    m.params[k] = saved - h;
    const double down = loss_and_grad(m, toks, 1.0, {});
    m.params[k] = saved;
    const double fd = (up - down) / (2 * h);
    CAPTURE(k);
    CHECK(std::abs(fd - grad[k]) <= 1e-4 * std::max(std::abs(fd), 1e-3));
  }
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto corpus = make_corpus(7, 40);
  const auto a = train_toy(tiny_config(), corpus, quick(60));
  const auto b = train_toy(tiny_config(), corpus, quick(60));
  CHECK(a == b);
  CHECK(a.steps_trained == 60);
  REQUIRE(a.loss_trace.size() == 60);
  double head = 0, tail = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    head += a.loss_trace[i];
    tail += a.loss_trace[50 + i];
  }
  CHECK(tail < head);
  for (double p : a.params) CHECK(static_cast<double>(static_cast<float>(p)) == p);
  CHECK_THROWS_AS(train_toy(tiny_config(), corpus, quick(0)), DataError);
}

TEST_CASE("greedy generation is deterministic and respects the context") {
  const auto m = train_toy(tiny_config(), make_corpus(1, 20), quick(5));
  const std::vector<Token> prompt{vocab::kBos, ' ', '+'};
  const auto a = generate_trace(m, prompt, 5, nullptr);
  CHECK(a.tokens == generate_trace(m, prompt, 5, nullptr).tokens);
  CHECK(a.next_probs.size() == 5);
  CHECK(a.final_states.size() == 5);
  double total = 0.0;
  for (double p : a.next_probs[0]) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(generate_trace(m, prompt, 22, nullptr), DataError);
}

TEST_CASE("steered generation checks its inputs") {
  const auto m = train_toy(tiny_config(), make_corpus(1, 20), quick(5));
  const std::vector<Token> prompt{vocab::kBos, ' '};
  steerkit::SteerSpec s;
  s.direction = {1, 0, 0, 0, 0, 0, 0, 0};
  s.layer = 1;
  CHECK(generate_steered(m, prompt, s, 3) == generate_trace(m, prompt, 3, nullptr).tokens);
  s.layer = 2;
  CHECK_THROWS_AS(generate_steered(m, prompt, s, 3), DataError);
  s.layer = 0;
  s.direction[1] = 1.0;
  CHECK_THROWS_AS(generate_steered(m, prompt, s, 3), DataError);
  s.direction[1] = 0.0;
  CHECK_THROWS_AS(generate_steered(init_toy(tiny_config()), prompt, s, 3), DataError);
}

TEST_CASE("register dump layout") {
  const auto m = train_toy(tiny_config(), make_corpus(1, 20), quick(5));
  const auto corpus = make_corpus(2, 10);
  const auto d = export_register_dump(m, corpus);
  CHECK(d.n_layers() == 2);
  CHECK(d.n_samples() == 10);
  CHECK(d.dim() == 8);
  CHECK(d.dtype() == repstore::Dtype::kF32);
  CHECK(d.meta()[0].id == "toy-00000");
  const auto& seq = corpus.sequences[3];
  const auto h = forward_capture(m, std::span<const Token>(seq.data(), seq.size() - 1));
  const auto want = h.at(1, seq.size() - 2);
  const auto got = d.state(1, 3);
  for (std::size_t j = 0; j < 8; ++j) CHECK(got[j] == static_cast<double>(static_cast<float>(want[j])));
  for (std::size_t i = 0; i < 10; ++i) {
    const bool conc = corpus.registers[i] == Register::kConcrete;
    CHECK(*d.meta()[i].static_score == (conc ? 4.5 : 1.5));
  }
}

TEST_CASE("TOY1 round trip") {
  const auto m = train_toy(tiny_config(), make_corpus(1, 20), quick(5));
  const auto bytes = encode_toy(m);
  CHECK(decode_toy(bytes) == m);
  CHECK(encode_toy(decode_toy(bytes)) == bytes);
  testutil::TempDir dir("toy");
  write_toy(m, dir / "m.toy");
  CHECK(read_toy(dir / "m.toy") == m);

  auto unrounded = m;
  unrounded.params[0] = 0.1;
  CHECK_THROWS_AS(encode_toy(unrounded), DataError);
}

TEST_CASE("TOY1 header corruption is rejected") {
  const auto m = init_toy(tiny_config());
  auto rounded = m;
  round_to_f32(rounded);
  const auto bytes = encode_toy(rounded);
  const std::size_t header = bytes.size() - 4 * rounded.params.size();
  numkit::Rng rng(8);
  for (int t = 0; t < 1000; ++t) {
    std::string b = bytes;
    const std::size_t pos = rng.below(header);
    b[pos] = static_cast<char>(b[pos] ^ static_cast<char>(1 + rng.below(255)));
    CHECK_THROWS_AS(decode_toy(b), repstore::FormatError);
  }
  CHECK_THROWS_AS(decode_toy(bytes.substr(0, bytes.size() - 4)), repstore::FormatError);
}
