#include <cmath>

#include "axisforge/simd/kernels.hpp"

namespace axisforge::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void rotate_scalar(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

void matvec_scalar(const double* w, const double* bias, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double d = dot_scalar(w + i * cols, x, cols);
    y[i] = bias ? bias[i] + d : d;
  }
}

void matvec_t_acc_scalar(const double* w, const double* d, double* out, std::size_t rows,
                         std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (d[i] != 0.0) axpy_scalar(d[i], w + i * cols, out, cols);
  }
}

void outer_acc_scalar(const double* d, const double* x, double* g, std::size_t rows,
                      std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (d[i] != 0.0) axpy_scalar(d[i], x, g + i * cols, cols);
  }
}

void adamw_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                  double lr, double beta1, double beta2, double eps, double weight_decay,
                  double bias_corr1, double bias_corr2) {
  const double decay = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    const double mhat = m[i] / bias_corr1;
    const double vhat = v[i] / bias_corr2;
    param[i] = param[i] * decay - lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{dot_scalar,          axpy_scalar,      rotate_scalar,
                                 matvec_scalar,       matvec_t_acc_scalar,
                                 outer_acc_scalar,    adamw_scalar};
  return table;
}

}  // namespace axisforge::simd
