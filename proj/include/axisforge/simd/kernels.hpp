#pragma once

// Double-precision inner-loop kernels with a scalar reference implementation
// and vector variants (AVX2+FMA on x86-64, NEON on aarch64) chosen at runtime.
//
// Every variant uses a fixed reduction order, so repeated calls on the same
// backend are bitwise reproducible. Variants agree with the scalar reference
// to rounding error, not bitwise (FMA and lane-wise partial sums).

#include <cstddef>
#include <string_view>

namespace axisforge::simd {

enum class Backend { kScalar, kAvx2, kNeon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // (x, y) <- (c*x - s*y, s*x + c*y)
  void (*rotate)(double* x, double* y, std::size_t n, double c, double s);
  // y[i] = bias[i] + W[i,:] . x ; W row-major rows x cols; bias may be null
  void (*matvec)(const double* w, const double* bias, const double* x, double* y,
                 std::size_t rows, std::size_t cols);
  // out[j] += sum_i d[i] * W[i,j]
  void (*matvec_t_acc)(const double* w, const double* d, double* out, std::size_t rows,
                       std::size_t cols);
  // G[i,j] += d[i] * x[j]
  void (*outer_acc)(const double* d, const double* x, double* g, std::size_t rows,
                    std::size_t cols);
  // Decoupled-weight-decay Adam update over a flat parameter block.
  void (*adamw)(double* param, const double* grad, double* m, double* v, std::size_t n,
                double lr, double beta1, double beta2, double eps, double weight_decay,
                double bias_corr1, double bias_corr2);
};

const KernelTable& scalar_kernels();
// Null when the variant was not compiled for this target.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

bool backend_available(Backend b);
// Throws std::invalid_argument when the backend is unavailable on this CPU.
void set_backend(Backend b);
Backend active_backend();
std::string_view backend_name(Backend b);
const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void rotate(double* x, double* y, std::size_t n, double c, double s) {
  active().rotate(x, y, n, c, s);
}
inline void matvec(const double* w, const double* bias, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
  active().matvec(w, bias, x, y, rows, cols);
}
inline void matvec_t_acc(const double* w, const double* d, double* out, std::size_t rows,
                         std::size_t cols) {
  active().matvec_t_acc(w, d, out, rows, cols);
}
inline void outer_acc(const double* d, const double* x, double* g, std::size_t rows,
                      std::size_t cols) {
  active().outer_acc(d, x, g, rows, cols);
}
inline void adamw(double* param, const double* grad, double* m, double* v, std::size_t n,
                  double lr, double beta1, double beta2, double eps, double weight_decay,
                  double bias_corr1, double bias_corr2) {
  active().adamw(param, grad, m, v, n, lr, beta1, beta2, eps, weight_decay, bias_corr1,
                 bias_corr2);
}

}  // namespace axisforge::simd
