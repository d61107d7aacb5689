#include "axisforge/probekit/probe_io.hpp"

#include <cmath>

#include "axisforge/repstore/binio.hpp"

namespace axisforge::probekit {

using repstore::ByteReader;
using repstore::ByteWriter;
using repstore::FormatError;
using repstore::FormatFault;

namespace {

constexpr std::string_view kMagic = "PRB1";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxHidden = 64;

}  // namespace

std::string encode_probe(const ProbeModel& model) {
  model.config.validate();
  if (model.params.size() != parameter_count(model.input_dim, model.config.hidden_sizes)) {
    throw FormatError(FormatFault::kShape, "probe parameter count does not match its architecture");
  }
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<std::uint32_t>(model.input_dim));
  w.put_u32(static_cast<std::uint32_t>(model.config.hidden_sizes.size()));
  for (auto h : model.config.hidden_sizes) w.put_u32(static_cast<std::uint32_t>(h));
  const auto& c = model.config;
  for (double v : {c.dropout_rate, c.lr, c.weight_decay, c.beta1, c.beta2, c.eps}) w.put_f64(v);
  w.put_u32(static_cast<std::uint32_t>(c.epochs));
  w.put_u32(static_cast<std::uint32_t>(c.batch_size));
  w.put_u64(c.seed);
  w.put_u32(static_cast<std::uint32_t>(model.loss_trace.size()));
  w.put_u64(model.params.size());
  w.put_u32(repstore::crc32(w.bytes()));
  for (double p : model.params) w.put_f64(p);
  for (double t : model.loss_trace) w.put_f64(t);
  return w.take();
}

ProbeModel decode_probe(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4, "magic") != kMagic) throw FormatError(FormatFault::kBadMagic, "not a PRB1 file");
  if (const auto v = r.get_u32("version"); v != kVersion) {
    throw FormatError(FormatFault::kVersion, "PRB version " + std::to_string(v) + ", expected 1");
  }
  ProbeModel m;
  m.input_dim = r.get_u32("input dim");
  const auto n_hidden = r.get_u32("hidden layer count");
  if (n_hidden == 0 || n_hidden > kMaxHidden) throw FormatError(FormatFault::kShape, "bad hidden layer count");
  m.config.hidden_sizes.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i) m.config.hidden_sizes.push_back(r.get_u32("hidden size"));
  auto& c = m.config;
  c.dropout_rate = r.get_f64("dropout");
  c.lr = r.get_f64("lr");
  c.weight_decay = r.get_f64("weight decay");
  c.beta1 = r.get_f64("beta1");
  c.beta2 = r.get_f64("beta2");
  c.eps = r.get_f64("eps");
  c.epochs = r.get_u32("epochs");
  c.batch_size = r.get_u32("batch size");
  c.seed = r.get_u64("seed");
  const std::uint64_t trace_len = r.get_u32("trace length");
  const std::uint64_t n_params = r.get_u64("parameter count");
  const auto header = r.consumed();
  if (r.get_u32("header checksum") != repstore::crc32(header)) {
    throw FormatError(FormatFault::kChecksum, "PRB1 header checksum mismatch");
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw FormatError(FormatFault::kInvariant, e.what());
  }
  if (m.input_dim == 0 || n_params != parameter_count(m.input_dim, c.hidden_sizes)) {
    throw FormatError(FormatFault::kShape, "parameter count does not match the declared architecture");
  }
  if ((n_params + trace_len) * 8 > r.remaining()) throw FormatError(FormatFault::kTruncated, "probe payload");
  m.params.resize(n_params);
  for (auto& p : m.params) p = r.get_f64("parameters");
  m.loss_trace.resize(trace_len);
  for (auto& t : m.loss_trace) t = r.get_f64("loss trace");
  r.expect_end("loss trace");
  for (double p : m.params)
    if (!std::isfinite(p)) throw FormatError(FormatFault::kInvariant, "non-finite probe parameter");
  return m;
}

void write_probe(const ProbeModel& model, const std::filesystem::path& path) {
  repstore::atomic_write_file(path, encode_probe(model));
}

ProbeModel read_probe(const std::filesystem::path& path) { return decode_probe(repstore::read_file(path)); }

}  // namespace axisforge::probekit
