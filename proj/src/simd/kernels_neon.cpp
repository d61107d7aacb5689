#include <arm_neon.h>

#include <cmath>

#include "axisforge/simd/kernels.hpp"

namespace axisforge::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void rotate_neon(double* x, double* y, std::size_t n, double c, double s) {
  const float64x2_t vc = vdupq_n_f64(c);
  const float64x2_t vs = vdupq_n_f64(s);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t xi = vld1q_f64(x + i);
    const float64x2_t yi = vld1q_f64(y + i);
    vst1q_f64(x + i, vfmsq_f64(vmulq_f64(vc, xi), vs, yi));
    vst1q_f64(y + i, vfmaq_f64(vmulq_f64(vc, yi), vs, xi));
  }
  for (; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

void matvec_neon(const double* w, const double* bias, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = dot_neon(w + r * cols, x, cols);
    y[r] = bias ? bias[r] + d : d;
  }
}

void matvec_t_acc_neon(const double* w, const double* d, double* out, std::size_t rows,
                       std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (d[i] != 0.0) axpy_neon(d[i], w + i * cols, out, cols);
  }
}

void outer_acc_neon(const double* d, const double* x, double* g, std::size_t rows,
                    std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (d[i] != 0.0) axpy_neon(d[i], x, g + i * cols, cols);
  }
}

void adamw_neon(double* param, const double* grad, double* m, double* v, std::size_t n,
                double lr, double beta1, double beta2, double eps, double weight_decay,
                double bias_corr1, double bias_corr2) {
  const double decay = 1.0 - lr * weight_decay;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t mi = vaddq_f64(vmulq_n_f64(vld1q_f64(m + i), beta1),
                                     vmulq_n_f64(g, 1.0 - beta1));
    const float64x2_t vi = vaddq_f64(vmulq_n_f64(vld1q_f64(v + i), beta2),
                                     vmulq_f64(vmulq_n_f64(g, 1.0 - beta2), g));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t mhat = vdivq_f64(mi, vdupq_n_f64(bias_corr1));
    const float64x2_t denom =
        vaddq_f64(vsqrtq_f64(vdivq_f64(vi, vdupq_n_f64(bias_corr2))), vdupq_n_f64(eps));
    const float64x2_t step = vdivq_f64(vmulq_n_f64(mhat, lr), denom);
    vst1q_f64(param + i, vsubq_f64(vmulq_n_f64(vld1q_f64(param + i), decay), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    param[i] = param[i] * decay - lr * (m[i] / bias_corr1) / (std::sqrt(v[i] / bias_corr2) + eps);
  }
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{dot_neon,        axpy_neon,         rotate_neon,
                                 matvec_neon,     matvec_t_acc_neon, outer_acc_neon,
                                 adamw_neon};
  return &table;
}

}  // namespace axisforge::simd
