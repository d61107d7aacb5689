#include "axisforge/numkit/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "axisforge/error.hpp"
#include "axisforge/simd/kernels.hpp"

namespace axisforge::numkit {
namespace {

constexpr int kMaxSweeps = 80;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct TallSvd {
  Matrix u;               // m x n
  std::vector<double> s;  // n
  Matrix vt;              // n x n
};

// Extends the orthonormal columns already present in `cols` (rows of the
// n x m matrix, flagged by `have`) to a full orthonormal set.
void complete_basis(Matrix& cols, const std::vector<bool>& have) {
  const std::size_t m = cols.cols();
  std::vector<std::size_t> done;
  for (std::size_t j = 0; j < cols.rows(); ++j)
    if (have[j]) done.push_back(j);

  std::vector<double> w(m), best(m);
  for (std::size_t j = 0; j < cols.rows(); ++j) {
    if (have[j]) continue;
    double best_norm = -1.0;
    for (std::size_t e = 0; e < m; ++e) {
      std::fill(w.begin(), w.end(), 0.0);
      w[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k : done) {
          auto uk = cols.row(k);
          simd::axpy(-simd::dot(uk.data(), w.data(), m), uk.data(), w.data(), m);
        }
      }
      const double nrm = std::sqrt(simd::dot(w.data(), w.data(), m));
      if (nrm > best_norm) {
        best_norm = nrm;
        best = w;
      }
    }
    auto dst = cols.row(j);
    for (std::size_t i = 0; i < m; ++i) dst[i] = best[i] / best_norm;
    done.push_back(j);
  }
}

TallSvd jacobi_tall(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  Matrix g = a.transposed();           // row j = column j of the working matrix
  Matrix vcols = Matrix::identity(n);  // row j = column j of V
  const double tol = kEps * std::sqrt(static_cast<double>(m));

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* gp = g.row(p).data();
        double* gq = g.row(q).data();
        const double alpha = simd::dot(gp, gp, m);
        const double beta = simd::dot(gq, gq, m);
        const double gamma = simd::dot(gp, gq, m);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        double t;
        if (std::abs(zeta) > 1e150) {
          t = 0.5 / zeta;
        } else {
          t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        simd::rotate(gp, gq, m, c, s);
        simd::rotate(vcols.row(p).data(), vcols.row(q).data(), n, c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto gj = g.row(j);
    sigma[j] = std::sqrt(simd::dot(gj.data(), gj.data(), m));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double smax = n ? sigma[order[0]] : 0.0;
  const double rank_tol = smax * static_cast<double>(std::max(m, n)) * kEps;

  TallSvd out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  Matrix ucols(n, m);
  std::vector<bool> have(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    const double sj = sigma[j];
    std::copy(vcols.row(j).begin(), vcols.row(j).end(), out.vt.row(k).begin());
    if (sj > rank_tol && sj > 0.0) {
      out.s[k] = sj;
      auto src = g.row(j);
      auto dst = ucols.row(k);
      for (std::size_t i = 0; i < m; ++i) dst[i] = src[i] / sj;
      have[k] = true;
    } else {
      out.s[k] = 0.0;
    }
  }
  complete_basis(ucols, have);
  out.u = ucols.transposed();
  return out;
}

void apply_sign_convention(SvdResult& r) {
  for (std::size_t j = 0; j < r.vt.rows(); ++j) {
    auto row = r.vt.row(j);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (std::abs(row[i]) > best) {
        best = std::abs(row[i]);
        arg = i;
      }
    }
    if (row[arg] < 0.0) {
      for (double& x : row) x = -x;
      for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, j) = -r.u(i, j);
    }
  }
}

}  // namespace

SvdResult thin_svd(const Matrix& m) {
  if (m.empty()) throw DataError("thin_svd: empty matrix");
  if (const auto bad = m.first_non_finite(); bad != Matrix::npos) {
    throw DataError("thin_svd: non-finite entry at row " + std::to_string(bad / m.cols()) +
                    ", column " + std::to_string(bad % m.cols()));
  }
  SvdResult r;
  if (m.rows() >= m.cols()) {
    TallSvd t = jacobi_tall(m);
    r.u = std::move(t.u);
    r.s = std::move(t.s);
    r.vt = std::move(t.vt);
  } else {
    // M^T = U' S V'^T  =>  M = V' S U'^T
    TallSvd t = jacobi_tall(m.transposed());
    r.u = t.vt.transposed();
    r.s = std::move(t.s);
    r.vt = t.u.transposed();
  }
  apply_sign_convention(r);
  return r;
}

}  // namespace axisforge::numkit
