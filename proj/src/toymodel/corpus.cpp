#include "axisforge/toymodel/corpus.hpp"

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"

namespace axisforge::toymodel {
namespace {

Token draw(numkit::Rng& rng, Token first, Token last) {
  return static_cast<Token>(first + rng.below(static_cast<std::uint64_t>(last - first + 1)));
}

Token content(numkit::Rng& rng, Register r) {
  return r == Register::kConcrete ? draw(rng, vocab::kConcreteFirst, vocab::kConcreteLast)
                                  : draw(rng, vocab::kAbstractFirst, vocab::kAbstractLast);
}

}  // namespace

RegisterCorpus make_corpus(std::uint64_t seed, std::size_t n_sequences, const CorpusOptions& opts) {
  if (n_sequences < 2) throw DataError("corpus needs at least two sequences");
  if (opts.sequence_length < 3) throw DataError("sequences need BOS, context and target");
  numkit::Rng rng(seed);
  RegisterCorpus corpus;
  corpus.sequences.reserve(n_sequences);
  for (std::size_t s = 0; s < n_sequences; ++s) {
    const Register reg = s % 2 == 0 ? Register::kConcrete : Register::kAbstract;
    std::vector<Token> seq{vocab::kBos};
    bool any_content = false;
    for (std::size_t i = 1; i + 1 < opts.sequence_length; ++i) {
      if (rng.bernoulli(opts.content_rate)) {
        seq.push_back(content(rng, reg));
        any_content = true;
      } else {
        seq.push_back(draw(rng, vocab::kFunctionFirst, vocab::kFunctionLast));
      }
    }
    if (!any_content) seq.back() = content(rng, reg);
    seq.push_back(content(rng, reg));
    corpus.sequences.push_back(std::move(seq));
    corpus.registers.push_back(reg);
  }
  return corpus;
}

std::vector<std::vector<Token>> make_neutral_prompts(std::uint64_t seed, std::size_t n, std::size_t length) {
  numkit::Rng rng(seed);
  std::vector<std::vector<Token>> out(n);
  for (auto& p : out) {
    p.push_back(vocab::kBos);
    for (std::size_t i = 1; i < length; ++i) p.push_back(draw(rng, vocab::kFunctionFirst, vocab::kFunctionLast));
  }
  return out;
}

}  // namespace axisforge::toymodel
