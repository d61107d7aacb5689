#include "axisforge/repstore/binio.hpp"

#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <bit>
#include <fstream>
#include <sstream>
#include <system_error>

namespace axisforge::repstore {

std::string_view fault_name(FormatFault f) {
  switch (f) {
    case FormatFault::kIo: return "io error";
    case FormatFault::kBadMagic: return "bad magic";
    case FormatFault::kVersion: return "version mismatch";
    case FormatFault::kTruncated: return "truncated";
    case FormatFault::kTrailingBytes: return "trailing bytes";
    case FormatFault::kBadDtype: return "bad dtype";
    case FormatFault::kBadPadding: return "nonzero padding";
    case FormatFault::kMetadata: return "bad metadata";
    case FormatFault::kCountMismatch: return "count mismatch";
    case FormatFault::kShape: return "shape mismatch";
    case FormatFault::kInvariant: return "invariant violation";
    case FormatFault::kChecksum: return "checksum mismatch";
  }
  return "format error";
}

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) put_u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteReader::need(std::size_t n, std::string_view what) const {
  if (remaining() < n) {
    throw FormatError(FormatFault::kTruncated, "need " + std::to_string(n) + " bytes for " +
                                                   std::string(what) + ", have " +
                                                   std::to_string(remaining()));
  }
}

std::string_view ByteReader::get_bytes(std::size_t n, std::string_view what) {
  need(n, what);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::get_u8(std::string_view what) {
  need(1, what);
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t ByteReader::get_u32(std::string_view what) {
  need(4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(data_[pos_++])} << (8 * i);
  return v;
}

std::uint64_t ByteReader::get_u64(std::string_view what) {
  need(8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(data_[pos_++])} << (8 * i);
  return v;
}

float ByteReader::get_f32(std::string_view what) { return std::bit_cast<float>(get_u32(what)); }
double ByteReader::get_f64(std::string_view what) { return std::bit_cast<double>(get_u64(what)); }

void ByteReader::expect_end(std::string_view what) const {
  if (remaining() != 0) {
    throw FormatError(FormatFault::kTrailingBytes,
                      std::to_string(remaining()) + " unexpected bytes after " + std::string(what));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatFault::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw FormatError(FormatFault::kIo, "read failed: " + path.string());
  return std::move(ss).str();
}

void atomic_write_file(const std::filesystem::path& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  static std::atomic<std::uint64_t> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatFault::kIo, "cannot create " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw FormatError(FormatFault::kIo, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw FormatError(FormatFault::kIo, "rename to " + path.string() + " failed");
  }
}

std::uint32_t crc32(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace axisforge::repstore
