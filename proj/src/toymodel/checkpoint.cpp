#include "axisforge/toymodel/checkpoint.hpp"

#include <cmath>

#include "axisforge/error.hpp"
#include "axisforge/repstore/binio.hpp"

namespace axisforge::toymodel {

using repstore::ByteReader;
using repstore::ByteWriter;
using repstore::FormatError;
using repstore::FormatFault;

namespace {

constexpr std::string_view kMagic = "TOY1";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::string encode_toy(const ToyModel& model) {
  const auto& c = model.config;
  c.validate();
  if (model.params.size() != param_layout(c).total) {
    throw FormatError(FormatFault::kShape, "toy parameter count does not match its config");
  }
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kVersion);
  for (std::size_t v : {c.vocab, c.d_model, c.n_layers, c.n_heads, c.ffn_dim, c.context}) {
    w.put_u32(static_cast<std::uint32_t>(v));
  }
  w.put_u64(c.seed);
  w.put_u64(model.steps_trained);
  w.put_u64(model.params.size());
  w.put_u32(repstore::crc32(w.bytes()));
  for (double p : model.params) {
    const float f = static_cast<float>(p);
    if (static_cast<double>(f) != p) {
      throw FormatError(FormatFault::kInvariant, "toy parameters must be rounded to f32 before saving");
    }
    w.put_f32(f);
  }
  return w.take();
}

ToyModel decode_toy(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4, "magic") != kMagic) throw FormatError(FormatFault::kBadMagic, "not a TOY1 file");
  if (const auto v = r.get_u32("version"); v != kVersion) {
    throw FormatError(FormatFault::kVersion, "TOY version " + std::to_string(v) + ", expected 1");
  }
  ToyModel m;
  auto& c = m.config;
  c.vocab = r.get_u32("vocab");
  c.d_model = r.get_u32("d_model");
  c.n_layers = r.get_u32("n_layers");
  c.n_heads = r.get_u32("n_heads");
  c.ffn_dim = r.get_u32("ffn_dim");
  c.context = r.get_u32("context");
  c.seed = r.get_u64("seed");
  m.steps_trained = r.get_u64("steps");
  const std::uint64_t n_params = r.get_u64("parameter count");
  const auto header = r.consumed();
  if (r.get_u32("header checksum") != repstore::crc32(header)) {
    throw FormatError(FormatFault::kChecksum, "TOY1 header checksum mismatch");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw FormatError(FormatFault::kInvariant, e.what());
  }
  if (n_params != param_layout(c).total) {
    throw FormatError(FormatFault::kShape, "parameter count does not match the config echo");
  }
  if (n_params * 4 > r.remaining()) throw FormatError(FormatFault::kTruncated, "toy parameters");
  m.params.resize(n_params);
  for (auto& p : m.params) {
    p = r.get_f32("parameters");
    if (!std::isfinite(p)) throw FormatError(FormatFault::kInvariant, "non-finite toy parameter");
  }
  r.expect_end("toy parameters");
  return m;
}

void write_toy(const ToyModel& model, const std::filesystem::path& path) {
  repstore::atomic_write_file(path, encode_toy(model));
}

ToyModel read_toy(const std::filesystem::path& path) { return decode_toy(repstore::read_file(path)); }

}  // namespace axisforge::toymodel
