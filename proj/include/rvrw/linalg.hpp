#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"

namespace rvrw {

/// Small dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : r_(rows), c_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return r_; }
  std::size_t cols() const { return c_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }
  double* row(std::size_t i) { return a_.data() + i * c_; }
  const double* row(std::size_t i) const { return a_.data() + i * c_; }
  const std::vector<double>& data() const { return a_; }

  double norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < r_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < c_; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }
  double norm_1() const {
    double m = 0.0;
    for (std::size_t j = 0; j < c_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < r_; ++i) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }
  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  std::vector<double> operator*(const std::vector<double>& x) const {
    std::vector<double> y(r_, 0.0);
    for (std::size_t i = 0; i < r_; ++i)
      for (std::size_t j = 0; j < c_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Matrix operator-(const Matrix& o) const {
    Matrix m = *this;
    for (std::size_t k = 0; k < a_.size(); ++k) m.a_[k] -= o.a_[k];
    return m;
  }

 private:
  std::size_t r_ = 0, c_ = 0;
  std::vector<double> a_;
};

inline double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Reduced row echelon solve of A x = b with partial pivoting.
struct Elimination {
  std::size_t rank = 0;
  bool consistent = true;
  std::vector<double> particular;                // free variables set to 0
  std::vector<std::vector<double>> null_basis;   // one vector per free column
  std::vector<std::size_t> pivot_cols;
};

inline Elimination eliminate(Matrix a, std::vector<double> b, double rel_tol = 1e-10) {
  const std::size_t n = a.rows(), nc = a.cols();
  const double tol = rel_tol * std::max(1.0, a.max_abs());
  Elimination out;
  std::size_t r = 0;
  std::vector<bool> is_pivot(nc, false);
  for (std::size_t col = 0; col < nc && r < n; ++col) {
    std::size_t p = r;
    for (std::size_t i = r + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(p, col))) p = i;
    if (std::abs(a(p, col)) <= tol) continue;
    if (p != r) {
      std::swap_ranges(a.row(p), a.row(p) + nc, a.row(r));
      std::swap(b[p], b[r]);
    }
    double piv = a(r, col);
    for (std::size_t j = 0; j < nc; ++j) a(r, j) /= piv;
    b[r] /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == r) continue;
      double f = a(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < nc; ++j) a(i, j) -= f * a(r, j);
      b[i] -= f * b[r];
      a(i, col) = 0.0;
    }
    out.pivot_cols.push_back(col);
    is_pivot[col] = true;
    ++r;
  }
  out.rank = r;
  double bscale = std::max(1.0, norm_inf(b));
  for (std::size_t i = r; i < n; ++i)
    if (std::abs(b[i]) > 1e-9 * bscale) out.consistent = false;
  out.particular.assign(nc, 0.0);
  for (std::size_t k = 0; k < r; ++k) out.particular[out.pivot_cols[k]] = b[k];
  for (std::size_t f = 0; f < nc; ++f) {
    if (is_pivot[f]) continue;
    std::vector<double> v(nc, 0.0);
    v[f] = 1.0;
    for (std::size_t k = 0; k < r; ++k) v[out.pivot_cols[k]] = -a(k, f);
    out.null_basis.push_back(std::move(v));
  }
  return out;
}

/// LU with partial pivoting; returns the determinant (0 for an exactly singular pivot).
inline double determinant(Matrix a) {
  const std::size_t n = a.rows();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) return 0.0;
    if (p != k) {
      std::swap_ranges(a.row(p), a.row(p) + n, a.row(k));
      det = -det;
    }
    det *= a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return det;
}

/// Product of row 2-norms; Hadamard's bound on |det|.
inline double hadamard_scale(const Matrix& a) {
  double s = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double r = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) r += a(i, j) * a(i, j);
    s *= std::sqrt(r);
  }
  return s;
}

inline std::optional<Matrix> inverse(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix a = m, inv = Matrix::identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) return std::nullopt;
    if (p != k) {
      std::swap_ranges(a.row(p), a.row(p) + n, a.row(k));
      std::swap_ranges(inv.row(p), inv.row(p) + n, inv.row(k));
    }
    double piv = a(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      a(k, j) /= piv;
      inv(k, j) /= piv;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      double f = a(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv;
}

/// 1-norm condition number; infinity when singular.
inline double condition_estimate(const Matrix& a) {
  auto inv = inverse(a);
  if (!inv) return std::numeric_limits<double>::infinity();
  return a.norm_1() * inv->norm_1();
}

namespace detail {

inline void balance(Matrix& a) {
  const std::size_t n = a.rows();
  const double radix = 2.0, sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(a(j, i));
          r += std::abs(a(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0, s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= g;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

// reduction to upper Hessenberg form by stabilized elementary similarity transforms
inline void hessenberg(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t m = 1; m + 1 < n; ++m) {
    double x = 0.0;
    std::size_t i = m;
    for (std::size_t j = m; j < n; ++j)
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        i = j;
      }
    if (i != m) {
      for (std::size_t j = m - 1; j < n; ++j) std::swap(a(i, j), a(m, j));
      for (std::size_t j = 0; j < n; ++j) std::swap(a(j, i), a(j, m));
    }
    if (x != 0.0) {
      for (i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y == 0.0) continue;
        y /= x;
        a(i, m - 1) = y;
        for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
        for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
      }
    }
  }
  for (std::size_t i = 2; i < n; ++i)
    for (std::size_t j = 0; j + 1 < i; ++j) a(i, j) = 0.0;
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Francis double-shift QR on an upper Hessenberg matrix
inline std::vector<std::complex<double>> hqr(Matrix& a, int max_its) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::complex<double>> w(n);
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  int nn = n - 1, l = 0, m = 0, its;
  double t = 0.0, p = 0.0, q = 0.0, r = 0.0, s, x, y, z, ww, u, v;
  while (nn >= 0) {
    its = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        w[nn--] = x + t;
      } else {
        y = a(nn - 1, nn - 1);
        ww = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + ww;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            w[nn - 1] = w[nn] = x + z;
            if (z != 0.0) w[nn] = x - ww / z;
          } else {
            w[nn] = {x + p, -z};
            w[nn - 1] = std::conj(w[nn]);
          }
          nn -= 2;
        } else {
          if (its == max_its) throw NoConvergence("QR iteration did not converge");
          if (its == 10 || its == 20) {
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            ww = -0.4375 * s * s;
          }
          ++its;
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k + 1 != nn) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k + 1 != nn) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return w;
}

}  // namespace detail

/// All eigenvalues of a real square matrix, sorted by descending real part.
inline std::vector<std::complex<double>> eigenvalues(Matrix a, int max_its = 60) {
  if (a.rows() != a.cols()) throw DomainError("eigenvalues need a square matrix");
  if (a.rows() == 0) return {};
  detail::balance(a);
  detail::hessenberg(a);
  auto w = detail::hqr(a, max_its);
  std::sort(w.begin(), w.end(), [](auto x, auto y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return w;
}

/// ||A v - lambda v|| / (||A|| ||v||) for an eigenvector obtained by inverse iteration.
inline double eigen_residual(const Matrix& a, std::complex<double> lambda) {
  using C = std::complex<double>;
  const std::size_t n = a.rows();
  const double anorm = std::max(a.norm_inf(), std::numeric_limits<double>::min());
  C mu = lambda + C(1e-10 * (1.0 + std::abs(lambda)), 0.0);
  std::vector<C> lu(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) lu[i * n + j] = a(i, j) - (i == j ? mu : C(0.0));
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu[i * n + k]) > std::abs(lu[p * n + k])) p = i;
    perm[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu[p * n + j], lu[k * n + j]);
    if (std::abs(lu[k * n + k]) < 1e-300) lu[k * n + k] = 1e-300;
    for (std::size_t i = k + 1; i < n; ++i) {
      C f = lu[i * n + k] / lu[k * n + k];
      lu[i * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= f * lu[k * n + j];
    }
  }
  std::vector<C> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = C(1.0 + 0.1 * static_cast<double>(i % 7), 0.05 * static_cast<double>(i % 3));
  for (int it = 0; it < 4; ++it) {
    for (std::size_t k = 0; k < n; ++k) std::swap(v[k], v[perm[k]]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) v[i] -= lu[i * n + j] * v[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) v[i] -= lu[i * n + j] * v[j];
      v[i] /= lu[i * n + i];
    }
    double nv = 0.0;
    for (auto& c : v) nv += std::norm(c);
    nv = std::sqrt(nv);
    for (auto& c : v) c /= nv;
  }
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    C s = -lambda * v[i];
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
    res += std::norm(s);
  }
  return std::sqrt(res) / anorm;
}

}  // namespace rvrw
