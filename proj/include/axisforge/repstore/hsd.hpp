#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace axisforge::repstore {

enum class Label { kHigh, kLow, kOther };
enum class Dtype : std::uint8_t { kF32 = 0, kF64 = 1 };

std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view s);

struct SampleMeta {
  std::string id;
  std::string word;
  std::optional<double> static_score;  // within [1, 5] when present
  std::optional<Label> label;
  std::optional<std::string> group;

  bool operator==(const SampleMeta&) const = default;
};

// Layer x sample x dimension activations plus per-sample metadata. Layer 0 is
// the first transformer block output. Values are always held as double; an
// f32 dump keeps them rounded to float precision so that storage round-trips
// are exact.
class HiddenStateDump {
 public:
  HiddenStateDump() = default;
  // Validates every invariant; throws FormatError(kInvariant / kShape).
  HiddenStateDump(std::size_t n_layers, std::size_t dim, Dtype dtype, std::vector<SampleMeta> meta,
                  std::vector<double> states);

  std::size_t n_layers() const noexcept { return n_layers_; }
  std::size_t n_samples() const noexcept { return meta_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  Dtype dtype() const noexcept { return dtype_; }
  const std::vector<SampleMeta>& meta() const noexcept { return meta_; }
  std::span<const double> states() const noexcept { return states_; }

  std::span<const double> state(std::size_t layer, std::size_t sample) const {
    return {states_.data() + (layer * meta_.size() + sample) * dim_, dim_};
  }

  bool operator==(const HiddenStateDump&) const = default;

 private:
  std::size_t n_layers_ = 0;
  std::size_t dim_ = 0;
  Dtype dtype_ = Dtype::kF32;
  std::vector<SampleMeta> meta_;
  std::vector<double> states_;
};

std::string encode_hsd(const HiddenStateDump& dump);
HiddenStateDump decode_hsd(std::string_view bytes);

// Returns the number of bytes written.
std::size_t write_hsd(const HiddenStateDump& dump, const std::filesystem::path& path);
HiddenStateDump read_hsd(const std::filesystem::path& path);

inline constexpr std::size_t kHsdHeaderSize = 32;

}  // namespace axisforge::repstore
