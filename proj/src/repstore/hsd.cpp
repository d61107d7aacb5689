#include "axisforge/repstore/hsd.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>
#include <unordered_set>

#include "axisforge/repstore/binio.hpp"

namespace axisforge::repstore {
namespace {

using ojson = nlohmann::ordered_json;

constexpr std::string_view kMagic = "HSD1";
constexpr std::uint32_t kVersion = 1;

std::size_t width(Dtype d) { return d == Dtype::kF32 ? 4 : 8; }

void check_score(const std::optional<double>& s, const std::string& id) {
  if (s && !(std::isfinite(*s) && *s >= 1.0 && *s <= 5.0)) {
    throw FormatError(FormatFault::kInvariant,
                      "static_score of sample '" + id + "' outside [1,5]");
  }
}

ojson meta_to_json(const std::vector<SampleMeta>& meta) {
  ojson arr = ojson::array();
  for (const auto& m : meta) {
    ojson rec;
    rec["id"] = m.id;
    rec["word"] = m.word;
    rec["static_score"] = m.static_score ? ojson(*m.static_score) : ojson(nullptr);
    rec["label"] = m.label ? ojson(std::string(label_name(*m.label))) : ojson(nullptr);
    rec["group"] = m.group ? ojson(*m.group) : ojson(nullptr);
    arr.push_back(std::move(rec));
  }
  return arr;
}

std::vector<SampleMeta> meta_from_json(std::string_view text) {
  ojson arr;
  try {
    arr = ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatFault::kMetadata, std::string("metadata is not valid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw FormatError(FormatFault::kMetadata, "metadata is not a JSON array");
  std::vector<SampleMeta> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& rec = arr[i];
    const std::string where = "metadata record " + std::to_string(i);
    if (!rec.is_object()) throw FormatError(FormatFault::kMetadata, where + " is not an object");
    auto str_field = [&](const char* key, bool required) -> std::optional<std::string> {
      auto it = rec.find(key);
      if (it == rec.end() || it->is_null()) {
        if (required) throw FormatError(FormatFault::kMetadata, where + " lacks '" + key + "'");
        return std::nullopt;
      }
      if (!it->is_string()) throw FormatError(FormatFault::kMetadata, where + ": '" + key + "' not a string");
      return it->get<std::string>();
    };
    SampleMeta m;
    m.id = *str_field("id", true);
    m.word = *str_field("word", true);
    if (auto it = rec.find("static_score"); it != rec.end() && !it->is_null()) {
      if (!it->is_number()) throw FormatError(FormatFault::kMetadata, where + ": static_score not a number");
      m.static_score = it->get<double>();
    }
    if (auto l = str_field("label", false)) {
      m.label = parse_label(*l);
      if (!m.label) throw FormatError(FormatFault::kMetadata, where + ": unknown label '" + *l + "'");
    }
    m.group = str_field("group", false);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

std::string_view label_name(Label l) {
  switch (l) {
    case Label::kHigh: return "high";
    case Label::kLow: return "low";
    case Label::kOther: return "other";
  }
  return "other";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "high") return Label::kHigh;
  if (s == "low") return Label::kLow;
  if (s == "other") return Label::kOther;
  return std::nullopt;
}

HiddenStateDump::HiddenStateDump(std::size_t n_layers, std::size_t dim, Dtype dtype,
                                 std::vector<SampleMeta> meta, std::vector<double> states)
    : n_layers_(n_layers), dim_(dim), dtype_(dtype), meta_(std::move(meta)), states_(std::move(states)) {
  if (n_layers_ < 1) throw FormatError(FormatFault::kInvariant, "dump needs at least one layer");
  if (dim_ < 1) throw FormatError(FormatFault::kInvariant, "dump needs dim >= 1");
  if (dtype_ != Dtype::kF32 && dtype_ != Dtype::kF64) throw FormatError(FormatFault::kBadDtype, "unknown dtype");
  if (states_.size() != n_layers_ * meta_.size() * dim_) {
    throw FormatError(FormatFault::kShape, "states length " + std::to_string(states_.size()) +
                                               " != L*N*D = " +
                                               std::to_string(n_layers_ * meta_.size() * dim_));
  }
  std::unordered_set<std::string> ids;
  for (const auto& m : meta_) {
    if (!ids.insert(m.id).second) throw FormatError(FormatFault::kInvariant, "duplicate sample id '" + m.id + "'");
    check_score(m.static_score, m.id);
  }
  for (std::size_t i = 0; i < states_.size(); ++i) {
    double& v = states_[i];
    if (dtype_ == Dtype::kF32) {
      if (std::abs(v) > std::numeric_limits<float>::max()) {
        throw FormatError(FormatFault::kInvariant, "value at flat index " + std::to_string(i) + " overflows f32");
      }
      v = static_cast<double>(static_cast<float>(v));
    }
    if (!std::isfinite(v)) {
      throw FormatError(FormatFault::kInvariant, "non-finite value at flat index " + std::to_string(i));
    }
  }
}

std::string encode_hsd(const HiddenStateDump& dump) {
  const std::string meta = meta_to_json(dump.meta()).dump();
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<std::uint32_t>(dump.n_layers()));
  w.put_u32(static_cast<std::uint32_t>(dump.n_samples()));
  w.put_u32(static_cast<std::uint32_t>(dump.dim()));
  w.put_u8(static_cast<std::uint8_t>(dump.dtype()));
  w.put_zeros(3);
  w.put_u64(meta.size());
  w.put_bytes(meta);
  if (dump.dtype() == Dtype::kF32) {
    for (double v : dump.states()) w.put_f32(static_cast<float>(v));
  } else {
    for (double v : dump.states()) w.put_f64(v);
  }
  return w.take();
}

HiddenStateDump decode_hsd(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4, "magic") != kMagic) throw FormatError(FormatFault::kBadMagic, "not an HSD1 file");
  if (const auto v = r.get_u32("version"); v != kVersion) {
    throw FormatError(FormatFault::kVersion, "HSD version " + std::to_string(v) + ", expected 1");
  }
  const std::uint64_t n_layers = r.get_u32("layer count");
  const std::uint64_t n_samples = r.get_u32("sample count");
  const std::uint64_t dim = r.get_u32("dim");
  const auto dtype_code = r.get_u8("dtype");
  if (dtype_code > 1) throw FormatError(FormatFault::kBadDtype, "dtype code " + std::to_string(dtype_code));
  const auto dtype = static_cast<Dtype>(dtype_code);
  for (auto b : r.get_bytes(3, "padding")) {
    if (b != '\0') throw FormatError(FormatFault::kBadPadding, "header padding must be zero");
  }
  const std::uint64_t meta_len = r.get_u64("metadata length");
  if (n_layers == 0) throw FormatError(FormatFault::kShape, "layer count is zero");
  if (dim == 0) throw FormatError(FormatFault::kShape, "dim is zero");
  if (meta_len > r.remaining()) {
    throw FormatError(FormatFault::kTruncated, "metadata length " + std::to_string(meta_len) +
                                                   " exceeds file size");
  }
  auto meta = meta_from_json(r.get_bytes(meta_len, "metadata"));
  if (meta.size() != n_samples) {
    throw FormatError(FormatFault::kCountMismatch, "header declares " + std::to_string(n_samples) +
                                                       " samples, metadata has " + std::to_string(meta.size()));
  }
  // Checked in extended precision before allocating; L*N*D may exceed 2^64.
  const long double expect_ld = static_cast<long double>(n_layers) * n_samples * dim * width(dtype);
  if (expect_ld > static_cast<long double>(r.remaining())) {
    throw FormatError(FormatFault::kTruncated, "payload shorter than L*N*D*width");
  }
  const std::size_t count = n_layers * n_samples * dim;
  if (count * width(dtype) < r.remaining()) {
    throw FormatError(FormatFault::kTrailingBytes, "payload longer than L*N*D*width");
  }
  std::vector<double> states(count);
  if (dtype == Dtype::kF32) {
    for (auto& v : states) v = r.get_f32("payload");
  } else {
    for (auto& v : states) v = r.get_f64("payload");
  }
  r.expect_end("payload");
  return HiddenStateDump(n_layers, dim, dtype, std::move(meta), std::move(states));
}

std::size_t write_hsd(const HiddenStateDump& dump, const std::filesystem::path& path) {
  const std::string bytes = encode_hsd(dump);
  atomic_write_file(path, bytes);
  return bytes.size();
}

HiddenStateDump read_hsd(const std::filesystem::path& path) { return decode_hsd(read_file(path)); }

}  // namespace axisforge::repstore
