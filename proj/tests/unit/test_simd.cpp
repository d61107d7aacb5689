#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "axisforge/numkit/rng.hpp"
#include "axisforge/simd/kernels.hpp"

using namespace axisforge;

namespace {

std::vector<double> randn(std::size_t n, std::uint64_t seed) {
  numkit::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

// Relative closeness scaled by the magnitude of the terms that were summed.
void check_close(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-13 * scale);
}

// Lengths straddling every vector-width remainder.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 31, 33, 64, 100, 257};

std::vector<const simd::KernelTable*> variants() {
  std::vector<const simd::KernelTable*> out;
  if (auto* k = simd::avx2_kernels(); k && simd::backend_available(simd::Backend::kAvx2)) out.push_back(k);
  if (auto* k = simd::neon_kernels(); k && simd::backend_available(simd::Backend::kNeon)) out.push_back(k);
  return out;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::backend_available(simd::Backend::kScalar));
  CHECK(simd::backend_name(simd::Backend::kScalar) == "scalar");
}

TEST_CASE("selecting an unavailable backend throws") {
  for (auto b : {simd::Backend::kAvx2, simd::Backend::kNeon}) {
    if (!simd::backend_available(b)) CHECK_THROWS_AS(simd::set_backend(b), std::invalid_argument);
  }
  const auto before = simd::active_backend();
  simd::set_backend(simd::Backend::kScalar);
  CHECK(simd::active_backend() == simd::Backend::kScalar);
  simd::set_backend(before);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  const auto& ref = simd::scalar_kernels();
  const auto vs = variants();
  if (vs.empty()) MESSAGE("no vector backend on this CPU; equivalence checks skipped");
  for (const auto* k : vs) {
    for (std::size_t n : kLengths) {
      CAPTURE(n);
      const auto a = randn(n, 1 + n), b = randn(n, 100 + n);
      double mag = 1.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
      CHECK(std::abs(k->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-13 * mag);

      auto y1 = b, y2 = b;
      k->axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      check_close(y1, y2, 4.0);

      auto x1 = a, x2 = a, z1 = b, z2 = b;
      k->rotate(x1.data(), z1.data(), n, 0.6, 0.8);
      ref.rotate(x2.data(), z2.data(), n, 0.6, 0.8);
      check_close(x1, x2, 8.0);
      check_close(z1, z2, 8.0);
    }
  }
}

TEST_CASE("vector matrix kernels agree with the scalar reference") {
  const auto& ref = simd::scalar_kernels();
  for (const auto* k : variants()) {
    for (std::size_t rows : {1, 3, 4, 5, 9}) {
      for (std::size_t cols : {1, 3, 4, 7, 16, 33}) {
        CAPTURE(rows);
        CAPTURE(cols);
        const auto w = randn(rows * cols, rows * 100 + cols);
        const auto x = randn(cols, 7 + cols);
        const auto d = randn(rows, 9 + rows);
        const auto bias = randn(rows, 11);
        const double scale = 4.0 * static_cast<double>(cols + rows);

        std::vector<double> y1(rows), y2(rows);
        k->matvec(w.data(), bias.data(), x.data(), y1.data(), rows, cols);
        ref.matvec(w.data(), bias.data(), x.data(), y2.data(), rows, cols);
        check_close(y1, y2, scale);
        k->matvec(w.data(), nullptr, x.data(), y1.data(), rows, cols);
        ref.matvec(w.data(), nullptr, x.data(), y2.data(), rows, cols);
        check_close(y1, y2, scale);

        std::vector<double> o1(cols, 0.5), o2(cols, 0.5);
        k->matvec_t_acc(w.data(), d.data(), o1.data(), rows, cols);
        ref.matvec_t_acc(w.data(), d.data(), o2.data(), rows, cols);
        check_close(o1, o2, scale);

        std::vector<double> g1(rows * cols, 0.25), g2(rows * cols, 0.25);
        k->outer_acc(d.data(), x.data(), g1.data(), rows, cols);
        ref.outer_acc(d.data(), x.data(), g2.data(), rows, cols);
        check_close(g1, g2, scale);
      }
    }
  }
}

TEST_CASE("vector adamw agrees with the scalar reference") {
  const auto& ref = simd::scalar_kernels();
  for (const auto* k : variants()) {
    for (std::size_t n : kLengths) {
      auto p1 = randn(n, 1), p2 = p1;
      const auto g = randn(n, 2);
      std::vector<double> m1(n, 0.0), m2(n, 0.0), v1(n, 0.0), v2(n, 0.0);
      double b1t = 1.0, b2t = 1.0;
      for (int step = 0; step < 5; ++step) {
        b1t *= 0.9;
        b2t *= 0.999;
        k->adamw(p1.data(), g.data(), m1.data(), v1.data(), n, 1e-3, 0.9, 0.999, 1e-8, 1e-4, 1 - b1t, 1 - b2t);
        ref.adamw(p2.data(), g.data(), m2.data(), v2.data(), n, 1e-3, 0.9, 0.999, 1e-8, 1e-4, 1 - b1t, 1 - b2t);
      }
      check_close(p1, p2, 10.0);
      check_close(m1, m2, 10.0);
      check_close(v1, v2, 10.0);
    }
  }
}

TEST_CASE("adamw matches a hand-computed first step") {
  // One step from m = v = 0: mhat = g, vhat = g^2, so the update is
  // p * (1 - lr * wd) - lr * g / (|g| + eps).
  std::vector<double> p{1.0, -2.0}, g{0.5, -4.0}, m(2, 0.0), v(2, 0.0);
  simd::scalar_kernels().adamw(p.data(), g.data(), m.data(), v.data(), 2, 0.1, 0.9, 0.999, 1e-8, 0.01, 0.1, 0.001);
  CHECK(p[0] == doctest::Approx(1.0 * (1 - 0.001) - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(-2.0 * (1 - 0.001) + 0.1 * 4.0 / (4.0 + 1e-8)).epsilon(1e-14));
}

TEST_CASE("every backend is bitwise reproducible") {
  std::vector<const simd::KernelTable*> all{&simd::scalar_kernels()};
  for (auto* k : variants()) all.push_back(k);
  const auto a = randn(1001, 5), b = randn(1001, 6);
  for (const auto* k : all) {
    const double first = k->dot(a.data(), b.data(), a.size());
    for (int i = 0; i < 5; ++i) CHECK(k->dot(a.data(), b.data(), a.size()) == first);
  }
}
