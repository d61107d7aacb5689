#include "axisforge/numkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::numkit {

double mean(std::span<const double> x) {
  if (x.empty()) throw DataError("mean of empty vector");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double norm2(std::span<const double> x) { return std::sqrt(simd::dot(x.data(), x.data(), x.size())); }

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("pearson: length mismatch " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  if (x.size() < 2) throw DataError("pearson: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("pearson: zero variance, correlation undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DataError("cosine: length mismatch");
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine: zero vector");
  return std::clamp(simd::dot(u.data(), v.data(), u.size()) / (nu * nv), -1.0, 1.0);
}

}  // namespace axisforge::numkit
