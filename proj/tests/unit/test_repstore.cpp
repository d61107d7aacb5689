#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "axisforge/error.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/repstore/axis_file.hpp"
#include "axisforge/repstore/binio.hpp"
#include "axisforge/repstore/curve.hpp"
#include "axisforge/repstore/hsd.hpp"
#include "support/helpers.hpp"

using namespace axisforge;
using namespace axisforge::repstore;

namespace {

HiddenStateDump small_dump(Dtype dtype = Dtype::kF32) {
  std::vector<SampleMeta> meta(3);
  meta[0] = {"a", "stone", 4.8, Label::kHigh, std::string("wiki")};
  meta[1] = {"b", "idea", 1.2, Label::kLow, std::nullopt};
  meta[2] = {"c", "river \"bank\"", std::nullopt, std::nullopt, std::string("magpie")};
  std::vector<double> states(2 * 3 * 4);
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = 0.1 * static_cast<double>(i) - 1.0;
  return HiddenStateDump(2, 4, dtype, std::move(meta), std::move(states));
}

FormatFault fault_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.fault();
  }
  FAIL("expected FormatError");
  return FormatFault::kIo;
}

ConceptAxisFile unit_axis(std::size_t k, std::size_t d, std::uint32_t layers) {
  ConceptAxisFile a;
  a.source_layers = layers;
  a.basis = numkit::Matrix(k, d);
  for (std::size_t i = 0; i < k; ++i) a.basis(i, i) = 1.0;
  for (std::size_t i = 0; i < k; ++i) a.singular_values.push_back(static_cast<double>(k - i));
  return a;
}

}  // namespace

TEST_CASE("hsd payload size arithmetic") {
  const auto dump = small_dump();
  const std::string bytes = encode_hsd(dump);
  std::uint64_t meta_len = 0;
  std::memcpy(&meta_len, bytes.data() + 24, 8);
  CHECK(bytes.size() == kHsdHeaderSize + meta_len + 96);
  CHECK(bytes.substr(0, 4) == "HSD1");
}

TEST_CASE("hsd round trip through a file") {
  testutil::TempDir dir("hsd");
  for (auto dtype : {Dtype::kF32, Dtype::kF64}) {
    const auto dump = small_dump(dtype);
    const auto n = write_hsd(dump, dir / "x.hsd");
    CHECK(n == std::filesystem::file_size(dir / "x.hsd"));
    const auto back = read_hsd(dir / "x.hsd");
    CHECK(back == dump);
    CHECK(encode_hsd(back) == encode_hsd(dump));
  }
}

TEST_CASE("f32 dumps hold float-rounded values") {
  const auto dump = small_dump(Dtype::kF32);
  for (double v : dump.states()) CHECK(static_cast<double>(static_cast<float>(v)) == v);
}

TEST_CASE("hsd metadata stores absent fields as null") {
  const std::string bytes = encode_hsd(small_dump());
  std::uint64_t meta_len = 0;
  std::memcpy(&meta_len, bytes.data() + 24, 8);
  const std::string meta = bytes.substr(kHsdHeaderSize, meta_len);
  CHECK(meta.find("\"static_score\":null") != std::string::npos);
  CHECK(meta.find("\"group\":null") != std::string::npos);
  CHECK(meta.find("\"label\":\"high\"") != std::string::npos);
}

TEST_CASE("hsd invariants are enforced on construction") {
  std::vector<SampleMeta> dup(2);
  dup[0].id = dup[1].id = "same";
  CHECK(fault_of([&] { HiddenStateDump(1, 1, Dtype::kF64, dup, {0.0, 0.0}); }) == FormatFault::kInvariant);

  std::vector<SampleMeta> one(1);
  one[0].id = "x";
  CHECK(fault_of([&] { HiddenStateDump(1, 2, Dtype::kF64, one, {0.0}); }) == FormatFault::kShape);
  CHECK(fault_of([&] { HiddenStateDump(1, 1, Dtype::kF64, one, {std::nan("")}); }) == FormatFault::kInvariant);
  CHECK(fault_of([&] { HiddenStateDump(0, 1, Dtype::kF64, one, {}); }) == FormatFault::kInvariant);
  one[0].static_score = 5.5;
  CHECK(fault_of([&] { HiddenStateDump(1, 1, Dtype::kF64, one, {0.0}); }) == FormatFault::kInvariant);
  one[0].static_score = 5.0;
  CHECK_NOTHROW(HiddenStateDump(1, 1, Dtype::kF64, one, {0.0}));
}

TEST_CASE("hsd decoder reports distinct faults") {
  const std::string good = encode_hsd(small_dump());

  std::string bad = good;
  bad[0] = 'X';
  CHECK(fault_of([&] { decode_hsd(bad); }) == FormatFault::kBadMagic);

  bad = good;
  bad[4] = 2;
  CHECK(fault_of([&] { decode_hsd(bad); }) == FormatFault::kVersion);

  bad = good;
  bad[20] = 7;
  CHECK(fault_of([&] { decode_hsd(bad); }) == FormatFault::kBadDtype);

  bad = good;
  bad[21] = 1;
  CHECK(fault_of([&] { decode_hsd(bad); }) == FormatFault::kBadPadding);

  CHECK(fault_of([&] { decode_hsd(good.substr(0, good.size() - 1)); }) == FormatFault::kTruncated);
  CHECK(fault_of([&] { decode_hsd(good + "x"); }) == FormatFault::kTrailingBytes);
  CHECK(fault_of([&] { decode_hsd(good.substr(0, 10)); }) == FormatFault::kTruncated);

  bad = good;
  bad[12] = 4;  // N = 4, metadata holds 3
  CHECK(fault_of([&] { decode_hsd(bad); }) == FormatFault::kCountMismatch);

  bad = good;
  bad[kHsdHeaderSize] = '{';  // metadata no longer a JSON array
  CHECK(fault_of([&] { decode_hsd(bad); }) == FormatFault::kMetadata);
}

TEST_CASE("hsd header fuzz never yields a silently accepted dump") {
  const auto dump = small_dump();
  const std::string good = encode_hsd(dump);
  numkit::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::string bad = good;
    const auto pos = rng.below(kHsdHeaderSize);
    const auto val = static_cast<char>(1 + rng.below(255));
    bad[pos] = static_cast<char>(bad[pos] ^ val);
    CAPTURE(pos);
    CHECK_THROWS_AS(decode_hsd(bad), FormatError);
  }
}

TEST_CASE("axis round trip and size") {
  const auto a = unit_axis(1, 8, 4);
  const std::string bytes = encode_axis(a);
  CHECK(bytes.size() == kCaxHeaderSize + 8 + 8 * 8);
  CHECK(decode_axis(bytes) == a);
  testutil::TempDir dir("cax");
  write_axis(a, dir / "a.cax");
  CHECK(read_axis(dir / "a.cax") == a);
}

TEST_CASE("axis invariants") {
  auto a = unit_axis(1, 8, 4);
  a.basis(0, 0) = 0.5;
  CHECK(fault_of([&] { encode_axis(a); }) == FormatFault::kInvariant);

  auto b = unit_axis(3, 8, 2);  // k > L_source
  CHECK(fault_of([&] { encode_axis(b); }) == FormatFault::kInvariant);

  auto c = unit_axis(1, 8, 4);
  c.singular_values[0] = -1.0;
  CHECK(fault_of([&] { encode_axis(c); }) == FormatFault::kInvariant);

  // A stored row that is not unit norm is rejected on read as well.
  std::string bytes = encode_axis(unit_axis(1, 8, 4));
  const double half = 0.5;
  std::memcpy(bytes.data() + kCaxHeaderSize + 8, &half, 8);
  CHECK(fault_of([&] { decode_axis(bytes); }) == FormatFault::kInvariant);
}

TEST_CASE("axis decoder reports distinct faults") {
  const std::string good = encode_axis(unit_axis(2, 8, 4));
  std::string bad = good;
  bad[1] = 'Z';
  CHECK(fault_of([&] { decode_axis(bad); }) == FormatFault::kBadMagic);
  bad = good;
  bad[5] = 1;
  CHECK(fault_of([&] { decode_axis(bad); }) == FormatFault::kVersion);
  bad = good;
  bad[20] = 1;
  CHECK(fault_of([&] { decode_axis(bad); }) == FormatFault::kBadDtype);
  bad = good;
  bad[23] = 1;
  CHECK(fault_of([&] { decode_axis(bad); }) == FormatFault::kBadPadding);
  CHECK(fault_of([&] { decode_axis(good.substr(0, good.size() - 8)); }) == FormatFault::kTruncated);
  CHECK(fault_of([&] { decode_axis(good + std::string(8, '\0')); }) == FormatFault::kTrailingBytes);
}

TEST_CASE("axis header fuzz over magic, version, count, dim and code fields") {
  // L_source (bytes 16..19) only records provenance; it is checked against k
  // but a change that keeps k <= L_source cannot be detected without a
  // checksum, which the CAX1 layout does not carry.
  const std::string good = encode_axis(unit_axis(2, 8, 4));
  numkit::Rng rng(77);
  int tried = 0;
  while (tried < 1000) {
    const auto pos = rng.below(kCaxHeaderSize);
    if (pos >= 16 && pos < 20) continue;
    ++tried;
    std::string bad = good;
    bad[pos] = static_cast<char>(bad[pos] ^ static_cast<char>(1 + rng.below(255)));
    CAPTURE(pos);
    CHECK_THROWS_AS(decode_axis(bad), FormatError);
  }
}

TEST_CASE("binio primitives are little-endian") {
  ByteWriter w;
  w.put_u32(0x01020304u);
  w.put_u64(0x0102030405060708ull);
  const std::string b = w.bytes();
  CHECK(static_cast<unsigned char>(b[0]) == 0x04);
  CHECK(static_cast<unsigned char>(b[3]) == 0x01);
  CHECK(static_cast<unsigned char>(b[4]) == 0x08);
  ByteReader r(b);
  CHECK(r.get_u32("a") == 0x01020304u);
  CHECK(r.get_u64("b") == 0x0102030405060708ull);
  CHECK_NOTHROW(r.expect_end("end"));
  CHECK(fault_of([&] { r.get_u8("past end"); }) == FormatFault::kTruncated);
  // Standard CRC-32 check value.
  CHECK(crc32("123456789") == 0xCBF43926u);
}

TEST_CASE("atomic writes leave no temporary behind") {
  testutil::TempDir dir("atomic");
  atomic_write_file(dir / "f.bin", "hello");
  atomic_write_file(dir / "f.bin", "world");
  CHECK(read_file(dir / "f.bin") == "world");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);
  // Writing into a missing directory fails without creating anything.
  CHECK_THROWS_AS(atomic_write_file(dir / "missing" / "f.bin", "x"), FormatError);
  CHECK_FALSE(std::filesystem::exists(dir / "missing"));
}

TEST_CASE("curve csv format") {
  LayerCurve c{Metric::kPearson, {0.9, 0.8}, std::nullopt};
  const std::string csv = format_curves_csv(std::span<const LayerCurve>(&c, 1));
  CHECK(csv == "layer,layer_norm,metric,value\n0,0,pearson,0.9\n1,1,pearson,0.8\n");

  LayerCurve big{Metric::kAuroc, std::vector<double>(32, 0.5), std::nullopt};
  const std::string csv32 = format_curves_csv(std::span<const LayerCurve>(&big, 1));
  CHECK(std::count(csv32.begin(), csv32.end(), '\n') == 33);
  CHECK(csv32.find("\n31,1,auroc,0.5\n") != std::string::npos);
  CHECK(csv32.find('\r') == std::string::npos);

  LayerCurve empty{Metric::kAuroc, {}, std::nullopt};
  CHECK_THROWS_AS(format_curves_csv(std::span<const LayerCurve>(&empty, 1)), DataError);
}

TEST_CASE("curve csv prints six significant digits and parses back") {
  LayerCurve c{Metric::kDeltaHigh, {0.123456789, -1.5}, std::nullopt};
  LayerCurve d{Metric::kDeltaLow, {2.0, 3.0}, std::nullopt};
  const std::vector<LayerCurve> both{c, d};
  const std::string csv = format_curves_csv(both);
  CHECK(csv.find("0,0,delta_high,0.123457\n") != std::string::npos);
  const auto back = parse_curves_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].metric == Metric::kDeltaHigh);
  CHECK(back[0].values == std::vector<double>{0.123457, -1.5});
  CHECK(back[1].values == std::vector<double>{2.0, 3.0});
  CHECK_THROWS_AS(parse_curves_csv("bad header\n"), DataError);
  CHECK_THROWS_AS(parse_curves_csv("layer,layer_norm,metric,value\n0,0,nope,1\n"), DataError);
}

TEST_CASE("single-layer curves keep their layer index") {
  LayerCurve c{Metric::kAuroc, {0.75}, std::vector<double>{20.0 / 31.0}};
  c.first_layer = 20;
  const std::string csv = format_curves_csv(std::span<const LayerCurve>(&c, 1));
  CHECK(csv == "layer,layer_norm,metric,value\n20,0.645161,auroc,0.75\n");
  CHECK(parse_curves_csv(csv)[0].first_layer == 20);
}
