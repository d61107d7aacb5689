#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "axisforge/error.hpp"

namespace axisforge::repstore {

enum class FormatFault {
  kIo,
  kBadMagic,
  kVersion,
  kTruncated,
  kTrailingBytes,
  kBadDtype,
  kBadPadding,
  kMetadata,
  kCountMismatch,
  kShape,
  kInvariant,
  kChecksum,
};

std::string_view fault_name(FormatFault f);

class FormatError : public DataError {
 public:
  FormatError(FormatFault fault, const std::string& what)
      : DataError(std::string(fault_name(fault)) + ": " + what), fault_(fault) {}
  FormatFault fault() const noexcept { return fault_; }

 private:
  FormatFault fault_;
};

// Little-endian encoder into an in-memory buffer.
class ByteWriter {
 public:
  void put_bytes(std::string_view b) { buf_.append(b); }
  void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f32(float v);
  void put_f64(double v);
  void put_zeros(std::size_t n) { buf_.append(n, '\0'); }

  std::size_t size() const noexcept { return buf_.size(); }
  const std::string& bytes() const noexcept { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

// Little-endian decoder; every read past the end raises kTruncated.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view get_bytes(std::size_t n, std::string_view what);
  std::uint8_t get_u8(std::string_view what);
  std::uint32_t get_u32(std::string_view what);
  std::uint64_t get_u64(std::string_view what);
  float get_f32(std::string_view what);
  double get_f64(std::string_view what);

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::string_view consumed() const noexcept { return data_.substr(0, pos_); }
  void expect_end(std::string_view what) const;

 private:
  void need(std::size_t n, std::string_view what) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary then renames over `path`; no partial file is
// left behind on failure.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);

std::uint32_t crc32(std::string_view bytes);

}  // namespace axisforge::repstore
