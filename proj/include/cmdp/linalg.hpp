/**
 * @file linalg.hpp
 * @brief Small dense linear algebra: SPD matrices, Cholesky, rank-one updates.
 *
 * Feature dimensions in this library are tabular (tens, not thousands), so a
 * compact row-major implementation beats a BLAS dependency. The rank-one
 * Cholesky update is the load-bearing piece: the ridge engine leans on it for
 * O(d^2) per-sample cost and for incremental log-determinants.
 */
#ifndef CMDP_LINALG_HPP
#define CMDP_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cmdp {

using Vec = std::vector<double>;

/// Row-major dense matrix, minimal surface.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

/**
 * Lower-triangular Cholesky factor of an SPD matrix, A = L L^T.
 * Supports full factorization, rank-one updates, triangular solves and the
 * log-determinant. Throws std::domain_error if A is not positive definite.
 */
class Cholesky {
 public:
  Cholesky() = default;

  void factor(const Mat& A) {
    if (A.rows != A.cols) throw std::domain_error("cholesky: matrix not square");
    d_ = A.rows;
    L_.assign(static_cast<size_t>(d_) * d_, 0.0);
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = A(i, j);
        for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        if (i == j) {
          if (s <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
          l(i, j) = std::sqrt(s);
        } else {
          l(i, j) = s / l(j, j);
        }
      }
    }
  }

  /// L <- chol(L L^T + x x^T), classic O(d^2) LINPACK-style update.
  void rank1_update(const Vec& x) {
    if (static_cast<int>(x.size()) != d_) throw std::domain_error("cholesky: dimension mismatch");
    Vec w = x;
    for (int k = 0; k < d_; ++k) {
      const double lkk = l(k, k);
      const double r = std::hypot(lkk, w[k]);
      const double c = r / lkk;
      const double s = w[k] / lkk;
      l(k, k) = r;
      for (int i = k + 1; i < d_; ++i) {
        l(i, k) = (l(i, k) + s * w[i]) / c;
        w[i] = c * w[i] - s * l(i, k);
      }
    }
  }

  /// Solve L y = b (forward substitution).
  void solve_lower(const Vec& b, Vec& y) const {
    y.resize(d_);
    for (int i = 0; i < d_; ++i) {
      double s = b[i];
      for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
  }

  /// Solve L^T z = y (backward substitution).
  void solve_upper(const Vec& y, Vec& z) const {
    z.resize(d_);
    for (int i = d_ - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < d_; ++k) s -= l(k, i) * z[k];
      z[i] = s / l(i, i);
    }
  }

  /// Solve (L L^T) z = b.
  void solve(const Vec& b, Vec& z) const {
    Vec y;
    solve_lower(b, y);
    solve_upper(y, z);
  }

  /// x^T (L L^T)^{-1} x = || L^{-1} x ||^2, nonnegative by construction.
  double quad_inv(const Vec& x) const {
    Vec y;
    solve_lower(x, y);
    return dot(y, y);
  }

  /// log det(L L^T) = 2 sum_i log L_ii.
  double logdet() const {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += std::log(l(i, i));
    return 2.0 * s;
  }

  int dim() const { return d_; }
  double entry(int i, int j) const { return l(i, j); }

 private:
  double& l(int i, int j) { return L_[static_cast<size_t>(i) * d_ + j]; }
  double l(int i, int j) const { return L_[static_cast<size_t>(i) * d_ + j]; }

  int d_ = 0;
  std::vector<double> L_;
};

}  // namespace cmdp

#endif  // CMDP_LINALG_HPP
