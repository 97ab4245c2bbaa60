#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nlcoef/error.hpp"

namespace nlcoef {

/// Thomas algorithm for a tridiagonal system. lower[0] and upper[n-1] are
/// ignored. No pivoting: the caller supplies a diagonally dominant or SPD
/// matrix.
inline std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                             std::span<const double> diag,
                                             std::span<const double> upper,
                                             std::span<const double> rhs) {
  const std::size_t n = diag.size();
  require(n > 0 && lower.size() == n && upper.size() == n && rhs.size() == n,
          ErrorCode::InvalidArgument, "solve_tridiagonal: size mismatch");
  std::vector<double> c(n), d(n), x(n);
  require(diag[0] != 0.0, ErrorCode::InvalidArgument, "solve_tridiagonal: zero pivot");
  c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - lower[i] * c[i - 1];
    require(m != 0.0, ErrorCode::InvalidArgument, "solve_tridiagonal: zero pivot");
    c[i] = upper[i] / m;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

/// Symmetric banded matrix stored by diagonals: band[k][i] = A(i, i+k) for
/// k = 0..bandwidth. Factorized in place by banded Cholesky.
class SymmetricBandMatrix {
public:
  SymmetricBandMatrix(std::size_t n, std::size_t bandwidth)
      : n_(n), bw_(bandwidth), band_(bandwidth + 1, std::vector<double>(n, 0.0)) {}

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  /// Adds v to A(i, j) (and implicitly A(j, i)). Requires |i - j| <= bandwidth.
  void add(std::size_t i, std::size_t j, double v) {
    if (i > j) std::swap(i, j);
    band_[j - i][i] += v;
  }
  double get(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    if (j - i > bw_) return 0.0;
    return band_[j - i][i];
  }

  /// Solves A x = rhs for SPD A. Throws if A is not positive definite.
  std::vector<double> solve(std::span<const double> rhs) const {
    require(rhs.size() == n_, ErrorCode::InvalidArgument, "band solve: size mismatch");
    // L stored as l[k][i] = L(i, i-k)
    std::vector<std::vector<double>> l(bw_ + 1, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = jlo; j <= i; ++j) {
        double s = get(i, j);
        const std::size_t klo = std::max(jlo, j >= bw_ ? j - bw_ : 0);
        for (std::size_t k = klo; k < j; ++k) s -= l[i - k][i] * l[j - k][j];
        if (i == j) {
          require(s > 0.0, ErrorCode::InvalidArgument, "band solve: matrix not positive definite");
          l[0][i] = std::sqrt(s);
        } else {
          l[i - j][i] = s / l[0][j];
        }
      }
    }
    std::vector<double> y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t klo = i >= bw_ ? i - bw_ : 0;
      for (std::size_t k = klo; k < i; ++k) y[i] -= l[i - k][i] * y[k];
      y[i] /= l[0][i];
    }
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t khi = std::min(n_ - 1, i + bw_);
      for (std::size_t k = i + 1; k <= khi; ++k) y[i] -= l[k - i][k] * y[k];
      y[i] /= l[0][i];
    }
    return y;
  }

private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<std::vector<double>> band_;
};

}  // namespace nlcoef
