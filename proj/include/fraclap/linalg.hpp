#pragma once

// Dense symmetric linear algebra: Jacobi eigendecomposition, spectral
// matrix functions, quadratic forms and SPD solves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fraclap/errors.hpp"

namespace fraclap::linalg {

/// Immutable dense symmetric matrix, row-major full storage.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Takes ownership of `entries` (row-major n×n). Throws unless the data is
  /// finite and exactly symmetric.
  SymMatrix(std::size_t n, std::vector<double> entries) : n_(n), a_(std::move(entries)) {
    if (n_ == 0) throw std::invalid_argument("SymMatrix: dimension must be positive");
    if (a_.size() != n_ * n_) throw std::invalid_argument("SymMatrix: entry count does not match n*n");
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = a_[i * n_ + j];
        if (!std::isfinite(v)) throw std::invalid_argument("SymMatrix: non-finite entry");
        if (j > i && v != a_[j * n_ + i]) {
          throw std::invalid_argument("SymMatrix: entries (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") and its transpose differ");
        }
      }
    }
  }

  /// Builds from nearly symmetric data by averaging mirrored entries.
  static SymMatrix symmetrized(std::size_t n, std::vector<double> entries) {
    if (entries.size() != n * n) throw std::invalid_argument("SymMatrix: entry count does not match n*n");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double avg = 0.5 * (entries[i * n + j] + entries[j * n + i]);
        entries[i * n + j] = avg;
        entries[j * n + i] = avg;
      }
    }
    return SymMatrix(n, std::move(entries));
  }

  static SymMatrix identity(std::size_t n) { return diagonal(std::vector<double>(n, 1.0)); }

  static SymMatrix diagonal(std::span<const double> d) {
    std::vector<double> a(d.size() * d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) a[i * d.size() + i] = d[i];
    return SymMatrix(d.size(), std::move(a));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  std::span<const double> data() const noexcept { return a_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

inline SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.size() != b.size()) throw std::invalid_argument("SymMatrix difference: dimension mismatch");
  std::vector<double> d(a.data().begin(), a.data().end());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] -= b.data()[k];
  return SymMatrix(a.size(), std::move(d));
}

/// Eigenpairs sorted ascending; eigenvectors stored column-major so that
/// vector(j) is contiguous.
struct EigenDecomposition {
  std::vector<double> values;
  std::vector<double> vectors;

  std::size_t size() const noexcept { return values.size(); }
  std::span<const double> vector(std::size_t j) const { return {vectors.data() + j * size(), size()}; }
  double component(std::size_t i, std::size_t j) const { return vectors[j * size() + i]; }
};

struct JacobiOptions {
  double tol = 1e-13;
  int max_sweeps = 60;
};

/// Cyclic Jacobi rotations. Stops when the off-diagonal Frobenius norm drops
/// below tol·‖M‖_F; throws ConvergenceError after max_sweeps.
inline EigenDecomposition eigendecompose(const SymMatrix& m, JacobiOptions opts = {}) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("eigendecompose: tol must be positive");
  const std::size_t n = m.size();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double target = opts.tol * m.frobenius();
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += a[p * n + q] * a[p * n + q];
    return std::sqrt(2.0 * s);
  };

  bool converged = false;
  double off = off_norm();
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    if (off <= target) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        const double g = 100.0 * std::abs(apq);
        // Negligible relative to both diagonal entries: drop it.
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a[p * n + q] = 0.0;
          a[q * n + p] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a[p * n + p] = app - t * apq;
        a[q * n + q] = aqq + t * apq;
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          const double np = akp - s * (akq + tau * akp);
          const double nq = akq + s * (akp - tau * akq);
          a[k * n + p] = np;
          a[p * n + k] = np;
          a[k * n + q] = nq;
          a[q * n + k] = nq;
        }
        double* vp = v.data() + p * n;
        double* vq = v.data() + q * n;
        for (std::size_t k = 0; k < n; ++k) {
          const double x = vp[k];
          const double y = vq[k];
          vp[k] = x - s * (y + tau * x);
          vq[k] = y + s * (x - tau * y);
        }
      }
    }
    off = off_norm();
  }
  if (!converged && off > target) {
    throw ConvergenceError("eigendecompose: Jacobi did not converge in " + std::to_string(opts.max_sweeps) +
                               " sweeps (off-diagonal norm " + std::to_string(off) + ")",
                           off);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });
  EigenDecomposition e;
  e.values.resize(n);
  e.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    e.values[j] = a[order[j] * n + order[j]];
    std::copy_n(v.data() + order[j] * n, n, e.vectors.data() + j * n);
  }
  return e;
}

inline EigenDecomposition eigendecompose(const SymMatrix& m, double tol) {
  return eigendecompose(m, JacobiOptions{tol, 60});
}

/// Q·diag(f(λ))·Qᵀ for an arbitrary scalar function f.
template <class F>
SymMatrix spectral_function(const EigenDecomposition& e, F&& f) {
  const std::size_t n = e.size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(e.values[k]);
    if (fk == 0.0) continue;
    const double* q = e.vectors.data() + k * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = fk * q[j];
      if (c == 0.0) continue;
      double* col = out.data() + j * n;
      for (std::size_t i = 0; i < n; ++i) col[i] += c * q[i];
    }
  }
  return SymMatrix::symmetrized(n, std::move(out));
}

/// Q·diag(λ^s)·Qᵀ. Requires every eigenvalue to be positive.
inline SymMatrix spectral_power(const EigenDecomposition& e, double s) {
  for (double lam : e.values) {
    if (!(lam > 0.0)) {
      throw std::domain_error("spectral_power: nonpositive eigenvalue " + std::to_string(lam));
    }
  }
  if (s == 0.0) return SymMatrix::identity(e.size());
  return spectral_function(e, [s](double lam) { return s == 1.0 ? lam : std::pow(lam, s); });
}

inline std::vector<double> matvec(const SymMatrix& m, std::span<const double> u) {
  if (u.size() != m.size()) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * u[j];
    out[i] = acc;
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// uᵀ M u.
inline double quadratic_form(const SymMatrix& m, std::span<const double> u) {
  if (u.size() != m.size()) throw std::invalid_argument("quadratic_form: dimension mismatch");
  return dot(u, matvec(m, u));
}

/// Σ_j f(λ_j)·(q_jᵀu)², the eigenbasis route to uᵀ f(M) u.
template <class F>
double spectral_quadratic_form(const EigenDecomposition& e, std::span<const double> u, F&& f) {
  if (u.size() != e.size()) throw std::invalid_argument("spectral_quadratic_form: dimension mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double c = dot(e.vector(j), u);
    acc += f(e.values[j]) * c * c;
  }
  return acc;
}

/// Q·diag(f(λ))·Qᵀ·u without forming the matrix.
template <class F>
std::vector<double> spectral_apply(const EigenDecomposition& e, std::span<const double> u, F&& f) {
  if (u.size() != e.size()) throw std::invalid_argument("spectral_apply: dimension mismatch");
  std::vector<double> out(e.size(), 0.0);
  for (std::size_t j = 0; j < e.size(); ++j) {
    const auto q = e.vector(j);
    const double c = f(e.values[j]) * dot(q, u);
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * q[i];
  }
  return out;
}

/// Cholesky solve with one step of iterative refinement. Throws
/// NotPositiveDefinite on a nonpositive pivot and ConvergenceError when the
/// relative residual stays above tol.
inline std::vector<double> solve_spd(const SymMatrix& m, std::span<const double> b, double tol = 1e-12) {
  const std::size_t n = m.size();
  if (b.size() != n) throw std::invalid_argument("solve_spd: dimension mismatch");
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) {
      throw NotPositiveDefinite("solve_spd: matrix is not positive definite (pivot " + std::to_string(j) + " = " +
                                std::to_string(d) + ")");
    }
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  auto substitute = [&](std::span<const double> rhs) {
    std::vector<double> y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) y[i] -= l[i * n + k] * y[k];
      y[i] /= l[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) y[i] -= l[k * n + i] * y[k];
      y[i] /= l[i * n + i];
    }
    return y;
  };

  std::vector<double> x = substitute(b);
  auto residual = [&](const std::vector<double>& xv) {
    std::vector<double> r = matvec(m, xv);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return r;
  };
  std::vector<double> r = residual(x);
  const std::vector<double> dx = substitute(r);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  r = residual(x);

  const double bn = norm2(b);
  const double rn = norm2(r);
  if (rn > tol * bn) {
    throw ConvergenceError("solve_spd: residual " + std::to_string(rn) + " exceeds tolerance", rn / bn);
  }
  return x;
}

/// Symmetric tridiagonal SPD solve. `diag` has n entries, `off` n−1.
inline std::vector<double> solve_tridiagonal_spd(std::span<const double> diag, std::span<const double> off,
                                                 std::span<const double> b) {
  const std::size_t n = diag.size();
  if (n == 0 || off.size() + 1 != n || b.size() != n) {
    throw std::invalid_argument("solve_tridiagonal_spd: inconsistent sizes");
  }
  std::vector<double> d(n), c(n, 0.0), x(b.begin(), b.end());
  d[0] = diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      c[i - 1] = off[i - 1] / d[i - 1];
      d[i] = diag[i] - c[i - 1] * off[i - 1];
      x[i] -= c[i - 1] * x[i - 1];
    }
    if (!(d[i] > 0.0)) throw NotPositiveDefinite("solve_tridiagonal_spd: nonpositive pivot");
  }
  x[n - 1] /= d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = x[i] / d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace fraclap::linalg
