#pragma once

#include <cmath>
#include <cstdint>
#include <unistd.h>
#include <filesystem>
#include <string>
#include <vector>

#include "axisforge/numkit/matrix.hpp"
#include "axisforge/numkit/rng.hpp"
#include "axisforge/repstore/hsd.hpp"

namespace testutil {

using axisforge::numkit::Matrix;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  axisforge::numkit::Rng rng(seed);
  Matrix m(rows, cols);
  for (double& x : m.data()) x = rng.normal();
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
  return d;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("axisforge-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Two-class dump: every state is N(0, 1) noise plus class * shift * u at the
// layers in `planted`, with class +1 for high samples and -1 for low ones.
// High samples get static score 4.5 and label high, low ones 1.5 and label low.
struct PlantedDump {
  axisforge::repstore::HiddenStateDump dump;
  std::vector<double> u;
};

inline PlantedDump planted_dump(std::size_t L, std::size_t D, std::size_t n_per_class, double shift,
                                std::uint64_t seed, std::vector<bool> planted = {}) {
  using namespace axisforge;
  if (planted.empty()) planted.assign(L, true);
  numkit::Rng rng(seed);
  std::vector<double> u(D);
  double n2 = 0.0;
  for (double& x : u) {
    x = rng.normal();
    n2 += x * x;
  }
  for (double& x : u) x /= std::sqrt(n2);
  const std::size_t N = 2 * n_per_class;
  std::vector<repstore::SampleMeta> meta(N);
  for (std::size_t i = 0; i < N; ++i) {
    const bool high = i < n_per_class;
    meta[i].id = "s" + std::to_string(i);
    meta[i].word = high ? "stone" : "hope";
    meta[i].static_score = high ? 4.5 : 1.5;
    meta[i].label = high ? repstore::Label::kHigh : repstore::Label::kLow;
  }
  std::vector<double> states(L * N * D);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t i = 0; i < N; ++i) {
      const double c = i < n_per_class ? 1.0 : -1.0;
      for (std::size_t j = 0; j < D; ++j) {
        states[(l * N + i) * D + j] = rng.normal() + (planted[l] ? c * shift * u[j] : 0.0);
      }
    }
  }
  return {repstore::HiddenStateDump(L, D, repstore::Dtype::kF64, std::move(meta), std::move(states)), u};
}

}  // namespace testutil
