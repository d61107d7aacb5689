#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace axisforge::toymodel {

using Token = std::uint8_t;

// Byte-level vocabulary split into disjoint roles. Function tokens are shared
// by both registers; content tokens belong to exactly one register.
namespace vocab {
inline constexpr Token kBos = 0x02;
inline constexpr Token kFunctionFirst = 0x20;  // ' ' .. '/'
inline constexpr Token kFunctionLast = 0x2f;
inline constexpr Token kConcreteFirst = 'a';
inline constexpr Token kConcreteLast = 'z';
inline constexpr Token kAbstractFirst = 'A';
inline constexpr Token kAbstractLast = 'Z';

constexpr bool is_function(int t) { return t >= kFunctionFirst && t <= kFunctionLast; }
constexpr bool is_concrete(int t) { return t >= kConcreteFirst && t <= kConcreteLast; }
constexpr bool is_abstract(int t) { return t >= kAbstractFirst && t <= kAbstractLast; }
}  // namespace vocab

enum class Register { kConcrete, kAbstract };

struct RegisterCorpus {
  std::vector<std::vector<Token>> sequences;
  std::vector<Register> registers;

  std::size_t size() const noexcept { return sequences.size(); }
};

struct CorpusOptions {
  std::size_t sequence_length = 16;  // BOS + context + target
  double content_rate = 0.5;         // chance a context slot holds a content token
};

// Sequences alternate concrete/abstract, so registers are balanced. Each is
// BOS, a context of function tokens mixed with content tokens of the
// sequence's register (at least one), then a target content token of the
// same register. Throws DataError when n_sequences < 2.
RegisterCorpus make_corpus(std::uint64_t seed, std::size_t n_sequences, const CorpusOptions& opts = {});

// Neutral prompts: BOS followed by function tokens only.
std::vector<std::vector<Token>> make_neutral_prompts(std::uint64_t seed, std::size_t n, std::size_t length);

}  // namespace axisforge::toymodel
