#include "axisforge/repstore/axis_file.hpp"

#include <algorithm>
#include <cmath>

#include "axisforge/repstore/binio.hpp"

namespace axisforge::repstore {
namespace {

constexpr std::string_view kMagic = "CAX1";
constexpr std::uint32_t kVersion = 1;

void validate(const ConceptAxisFile& a, const char* stage) {
  const std::string ctx(stage);
  if (a.k() < 1 || a.dim() < 1) throw FormatError(FormatFault::kShape, ctx + ": axis needs k >= 1 and D >= 1");
  if (a.singular_values.size() != a.k()) {
    throw FormatError(FormatFault::kShape, ctx + ": singular value count != k");
  }
  if (a.k() > std::min<std::size_t>(a.source_layers, a.dim())) {
    throw FormatError(FormatFault::kInvariant, ctx + ": k exceeds min(L_source, D)");
  }
  for (double s : a.singular_values) {
    if (!std::isfinite(s) || s < 0.0) throw FormatError(FormatFault::kInvariant, ctx + ": bad singular value");
  }
  if (a.basis.first_non_finite() != numkit::Matrix::npos) {
    throw FormatError(FormatFault::kInvariant, ctx + ": non-finite basis value");
  }
  for (std::size_t r = 0; r < a.k(); ++r) {
    double sq = 0.0;
    for (double x : a.basis.row(r)) sq += x * x;
    const double norm = std::sqrt(sq);
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      throw FormatError(FormatFault::kInvariant,
                        ctx + ": basis row " + std::to_string(r) + " has norm " + std::to_string(norm));
    }
  }
}

}  // namespace

std::string encode_axis(const ConceptAxisFile& axis) {
  validate(axis, "write_axis");
  ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<std::uint32_t>(axis.k()));
  w.put_u32(static_cast<std::uint32_t>(axis.dim()));
  w.put_u32(axis.source_layers);
  w.put_u8(static_cast<std::uint8_t>(axis.orientation));
  w.put_zeros(3);
  for (double s : axis.singular_values) w.put_f64(s);
  for (double x : axis.basis.data()) w.put_f64(x);
  return w.take();
}

ConceptAxisFile decode_axis(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4, "magic") != kMagic) throw FormatError(FormatFault::kBadMagic, "not a CAX1 file");
  if (const auto v = r.get_u32("version"); v != kVersion) {
    throw FormatError(FormatFault::kVersion, "CAX version " + std::to_string(v) + ", expected 1");
  }
  const std::uint64_t k = r.get_u32("k");
  const std::uint64_t dim = r.get_u32("dim");
  ConceptAxisFile a;
  a.source_layers = r.get_u32("source layer count");
  const auto orient = r.get_u8("orientation");
  if (orient != 0) throw FormatError(FormatFault::kBadDtype, "orientation code " + std::to_string(orient));
  for (auto b : r.get_bytes(3, "padding")) {
    if (b != '\0') throw FormatError(FormatFault::kBadPadding, "header padding must be zero");
  }
  if (k == 0 || dim == 0) throw FormatError(FormatFault::kShape, "k and D must be positive");
  const std::uint64_t need = (k + k * dim) * 8;
  if (need > r.remaining()) throw FormatError(FormatFault::kTruncated, "axis payload shorter than header implies");
  if (need < r.remaining()) throw FormatError(FormatFault::kTrailingBytes, "axis payload longer than header implies");
  a.singular_values.resize(k);
  for (auto& s : a.singular_values) s = r.get_f64("singular values");
  std::vector<double> basis(k * dim);
  for (auto& x : basis) x = r.get_f64("basis");
  a.basis = numkit::Matrix(k, dim, std::move(basis));
  r.expect_end("basis");
  validate(a, "read_axis");
  return a;
}

void write_axis(const ConceptAxisFile& axis, const std::filesystem::path& path) {
  atomic_write_file(path, encode_axis(axis));
}

ConceptAxisFile read_axis(const std::filesystem::path& path) { return decode_axis(read_file(path)); }

}  // namespace axisforge::repstore
