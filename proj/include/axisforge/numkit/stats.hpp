#pragma once

#include <span>

namespace axisforge::numkit {

// Pearson product-moment correlation, clamped to [-1, 1].
// Throws DataError on length mismatch or fewer than two points, and
// NumericalError when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Cosine similarity. Throws DataError on length mismatch or a zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

double mean(std::span<const double> x);
double norm2(std::span<const double> x);

}  // namespace axisforge::numkit
