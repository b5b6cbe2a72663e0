#pragma once

// Discrete Dirichlet Laplacian on a node mask, the spectral ("Navier") and
// restricted ("Dirichlet") fractional powers built from it, and the
// comparison checks between the two.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/domain.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/linalg.hpp"

namespace fraclap::operators {

using domain::BoxGrid;
using domain::GridFunction;
using domain::SubDomain;
using linalg::EigenDecomposition;
using linalg::SymMatrix;

/// Largest dense operator dimension handled before reporting a resource error.
inline constexpr std::size_t kMaxDenseSize = 4096;

enum class OperatorKind { laplacian, navier, dirichlet, difference };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::laplacian:
      return "laplacian";
    case OperatorKind::navier:
      return "navier";
    case OperatorKind::dirichlet:
      return "dirichlet";
    case OperatorKind::difference:
      return "difference";
  }
  return "?";
}

/// Symmetric operator on the nodes of a domain with its eigendecomposition
/// computed at construction.
struct SymOperator {
  SymMatrix matrix;
  EigenDecomposition eigen;
  OperatorKind kind = OperatorKind::laplacian;
  double exponent = 1.0;
  double cell_volume = 1.0;

  std::size_t size() const noexcept { return matrix.size(); }
  double min_eigenvalue() const { return eigen.values.front(); }
  std::vector<double> apply(std::span<const double> u) const { return linalg::matvec(matrix, u); }
  /// Discrete quadratic form h^dim·uᵀMu, the grid analogue of (Au, u)_{L2}.
  double form(std::span<const double> u) const { return cell_volume * linalg::quadratic_form(matrix, u); }
};

namespace detail {

inline void check_exponent(double s) {
  if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("fractional exponent s must lie in (0, 1], got " + std::to_string(s));
}

inline void check_dense(std::size_t n) {
  if (n > kMaxDenseSize) {
    throw ResourceError("dense operator of dimension " + std::to_string(n) + " exceeds the limit " +
                        std::to_string(kMaxDenseSize) + "; use fewer nodes or a smaller domain");
  }
}

/// sin(π·m/(n+1)) with m reduced mod 2(n+1) first.
inline double sine_entry(long long m, long long n) {
  const long long period = 2 * (n + 1);
  m %= period;
  return std::sin(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n + 1));
}

inline double sine_eigenvalue(int k, int n, double h) {
  const double sn = std::sin(std::numbers::pi * k / (2.0 * (n + 1)));
  return 4.0 / (h * h) * sn * sn;
}

/// Closed-form eigenpairs of the Dirichlet 5-point (or 3-point) Laplacian on
/// an nx×ny block (ny = 1 in 1D), ordered by ascending eigenvalue. Local node
/// order is ix + nx·iy.
inline EigenDecomposition sine_eigenbasis(int dim, int nx, int ny, double h) {
  struct Mode {
    double value;
    int kx, ky;
  };
  std::vector<Mode> modes;
  for (int ky = 1; ky <= (dim == 2 ? ny : 1); ++ky)
    for (int kx = 1; kx <= nx; ++kx)
      modes.push_back({sine_eigenvalue(kx, nx, h) + (dim == 2 ? sine_eigenvalue(ky, ny, h) : 0.0), kx, ky});
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) { return a.value < b.value; });

  const std::size_t n = modes.size();
  EigenDecomposition e;
  e.values.resize(n);
  e.vectors.resize(n * n);
  const double cx = std::sqrt(2.0 / (nx + 1));
  const double cy = dim == 2 ? std::sqrt(2.0 / (ny + 1)) : 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    e.values[j] = modes[j].value;
    double* col = e.vectors.data() + j * n;
    for (int iy = 0; iy < (dim == 2 ? ny : 1); ++iy) {
      const double fy = dim == 2 ? cy * sine_entry(static_cast<long long>(modes[j].ky) * (iy + 1), ny) : 1.0;
      for (int ix = 0; ix < nx; ++ix) {
        col[ix + nx * iy] = fy * cx * sine_entry(static_cast<long long>(modes[j].kx) * (ix + 1), nx);
      }
    }
  }
  return e;
}

inline SymMatrix stencil_matrix(const SubDomain& omega) {
  const std::size_t n = omega.size();
  check_dense(n);
  const double h = omega.grid().step();
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    a[r * n + r] = 2.0 * omega.grid().dim * inv_h2;
    for (std::size_t nb : omega.neighbours(omega.nodes()[r])) {
      const std::size_t c = omega.position(nb);
      if (c < n) a[r * n + c] = -inv_h2;
    }
  }
  return SymMatrix(n, std::move(a));
}

inline EigenDecomposition laplacian_eigen(const SubDomain& omega, const SymMatrix& m) {
  std::array<int, 4> block{};
  if (omega.rectangular_block(block)) {
    return sine_eigenbasis(omega.grid().dim, block[1], block[3], omega.grid().step());
  }
  return linalg::eigendecompose(m);
}

}  // namespace detail

/// Second-order central differences with homogeneous exterior values:
/// 1D stencil (−1, 2, −1)/h², 2D five-point stencil.
inline SymOperator assemble_laplacian(const SubDomain& omega) {
  SymMatrix m = detail::stencil_matrix(omega);
  EigenDecomposition e = detail::laplacian_eigen(omega, m);
  return SymOperator{std::move(m), std::move(e), OperatorKind::laplacian, 1.0, omega.grid().cell_volume()};
}

inline SymOperator assemble_laplacian(const BoxGrid& box) { return assemble_laplacian(domain::full_box(box)); }

/// s-th spectral power of the discrete Dirichlet Laplacian of Ω.
inline SymOperator navier_operator(const SubDomain& omega, double s) {
  detail::check_exponent(s);
  SymOperator lap = assemble_laplacian(omega);
  lap.kind = OperatorKind::navier;
  lap.exponent = s;
  if (s == 1.0) return lap;
  SymMatrix m = linalg::spectral_power(lap.eigen, s);
  EigenDecomposition e = std::move(lap.eigen);
  for (double& v : e.values) v = std::pow(v, s);
  return SymOperator{std::move(m), std::move(e), OperatorKind::navier, s, lap.cell_volume};
}

/// P·B^s·Pᵀ, with B the Laplacian of the whole box and P the restriction to
/// Ω: the box-embedded stand-in for the full-space form restricted to
/// functions supported in Ω.
inline SymOperator dirichlet_operator(const SubDomain& omega, const BoxGrid& box, double s) {
  detail::check_exponent(s);
  SubDomain inner = [&] {
    try {
      return domain::embed(omega, box);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("dirichlet_operator: domain is not embedded in the box: ") + e.what());
    }
  }();
  if (inner.is_full_box() || s == 1.0) {
    // P = I, or B^1 = B whose restriction is the stencil on Ω.
    SymOperator op = inner.is_full_box() ? navier_operator(inner, s) : assemble_laplacian(inner);
    op.kind = OperatorKind::dirichlet;
    op.exponent = s;
    return op;
  }

  const std::size_t m = inner.size();
  detail::check_dense(m);
  const int nb = box.nodes_per_axis;
  const double h = box.step();
  const int ny = box.dim == 2 ? nb : 1;
  const std::size_t modes = static_cast<std::size_t>(nb) * static_cast<std::size_t>(ny);
  const double cx = std::sqrt(2.0 / (nb + 1));
  const double cy = box.dim == 2 ? cx : 1.0;

  std::vector<double> weight(modes);
  for (int ky = 1; ky <= ny; ++ky)
    for (int kx = 1; kx <= nb; ++kx) {
      const double mu = detail::sine_eigenvalue(kx, nb, h) + (box.dim == 2 ? detail::sine_eigenvalue(ky, nb, h) : 0.0);
      weight[(kx - 1) + static_cast<std::size_t>(nb) * (ky - 1)] = std::sqrt(std::pow(mu, s));
    }
  // R(i, k) = S(p_i, k)·μ_k^{s/2}, so that P B^s Pᵀ = R Rᵀ.
  std::vector<double> r(m * modes);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ij = box.axis_indices(inner.nodes()[i]);
    double* row = r.data() + i * modes;
    for (int ky = 1; ky <= ny; ++ky) {
      const double fy = box.dim == 2 ? cy * detail::sine_entry(static_cast<long long>(ky) * (ij[1] + 1), nb) : 1.0;
      for (int kx = 1; kx <= nb; ++kx) {
        const std::size_t k = (kx - 1) + static_cast<std::size_t>(nb) * (ky - 1);
        row[k] = fy * cx * detail::sine_entry(static_cast<long long>(kx) * (ij[0] + 1), nb) * weight[k];
      }
    }
  }
  std::vector<double> a(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double acc = 0.0;
      const double* ri = r.data() + i * modes;
      const double* rj = r.data() + j * modes;
      for (std::size_t k = 0; k < modes; ++k) acc += ri[k] * rj[k];
      a[i * m + j] = acc;
      a[j * m + i] = acc;
    }
  }
  SymMatrix mat(m, std::move(a));
  EigenDecomposition e = linalg::eigendecompose(mat);
  return SymOperator{std::move(mat), std::move(e), OperatorKind::dirichlet, s, box.cell_volume()};
}

/// Σ_k |ξ_k|^{2s}·|û_k|² on the periodic box, with û the discrete Fourier
/// coefficients of u (zero at the boundary nodes) and ξ_k = πk/L per axis.
/// The zero mode contributes nothing.
inline double fourier_form(const GridFunction& u, const SubDomain& omega, double s) {
  detail::check_exponent(s);
  if (!domain::supported_in(u, omega)) throw std::invalid_argument("fourier_form: function is not supported in the domain");
  const BoxGrid& g = u.grid;
  const int n = g.nodes_per_axis + 1;
  const double L = g.halfwidth;
  const double h = g.step();

  std::vector<std::complex<double>> twiddle(n);
  for (int j = 0; j < n; ++j) twiddle[j] = std::polar(1.0, -2.0 * std::numbers::pi * j / n);
  auto dft = [&](std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
    for (int k = 0; k < n; ++k) {
      std::complex<double> acc{0.0, 0.0};
      long long idx = 0;
      for (int j = 0; j < n; ++j) {
        if (in[j] != 0.0) acc += in[j] * twiddle[idx];
        idx += k;
        if (idx >= n) idx -= n;
      }
      out[k] = acc;
    }
  };
  auto xi = [&](int k) {
    const int kk = k <= n / 2 ? k : k - n;
    return std::numbers::pi * std::abs(kk) / L;
  };
  // Periodic sample j = 0 is the boundary node x = −L where u vanishes.
  const double coeff_scale = h / (2.0 * L);

  double total = 0.0;
  if (g.dim == 1) {
    std::vector<std::complex<double>> in(n, 0.0), out(n);
    for (int j = 1; j < n; ++j) in[j] = u.values[j - 1];
    dft(in, out);
    for (int k = 1; k < n; ++k) total += std::pow(xi(k), 2.0 * s) * std::norm(coeff_scale * out[k]);
    return 2.0 * L * total;
  }

  std::vector<std::complex<double>> rows(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<std::complex<double>> in(n), out(n);
  for (int iy = 1; iy < n; ++iy) {
    bool nonzero = false;
    in.assign(n, 0.0);
    for (int ix = 1; ix < n; ++ix) {
      in[ix] = u.values[g.index(ix - 1, iy - 1)];
      nonzero = nonzero || in[ix] != 0.0;
    }
    if (!nonzero) continue;
    dft(in, out);
    for (int k = 0; k < n; ++k) rows[static_cast<std::size_t>(iy) * n + k] = out[k];
  }
  for (int kx = 0; kx < n; ++kx) {
    for (int iy = 0; iy < n; ++iy) in[iy] = rows[static_cast<std::size_t>(iy) * n + kx];
    dft(in, out);
    for (int ky = 0; ky < n; ++ky) {
      if (kx == 0 && ky == 0) continue;
      const double k2 = xi(kx) * xi(kx) + xi(ky) * xi(ky);
      total += std::pow(k2, s) * std::norm(coeff_scale * coeff_scale * out[ky]);
    }
  }
  return 4.0 * L * L * total;
}

/// Navier minus Dirichlet operator.
inline SymOperator difference_operator(const SymOperator& navier, const SymOperator& dirichlet) {
  if (navier.size() != dirichlet.size()) throw std::invalid_argument("difference_operator: size mismatch");
  SymMatrix m = navier.matrix - dirichlet.matrix;
  EigenDecomposition e = linalg::eigendecompose(m);
  return SymOperator{std::move(m), std::move(e), OperatorKind::difference, navier.exponent, navier.cell_volume};
}

inline SymOperator difference_operator(const SubDomain& omega, const BoxGrid& box, double s) {
  return difference_operator(navier_operator(omega, s), dirichlet_operator(omega, box, s));
}

/// Ascending eigenvalues of both operators, paired index by index.
struct SpectrumComparison {
  double s = 0.0;
  std::vector<double> navier;
  std::vector<double> dirichlet;
  std::vector<double> margins;

  double min_margin() const { return *std::min_element(margins.begin(), margins.end()); }
  double max_abs_margin() const {
    double m = 0.0;
    for (double v : margins) m = std::max(m, std::abs(v));
    return m;
  }
};

inline SpectrumComparison compare_spectra(const SymOperator& navier, const SymOperator& dirichlet) {
  if (navier.size() != dirichlet.size()) throw std::invalid_argument("compare_spectra: size mismatch");
  SpectrumComparison c;
  c.s = navier.exponent;
  c.navier = navier.eigen.values;
  c.dirichlet = dirichlet.eigen.values;
  c.margins.resize(c.navier.size());
  for (std::size_t j = 0; j < c.margins.size(); ++j) c.margins[j] = c.navier[j] - c.dirichlet[j];
  return c;
}

inline SpectrumComparison compare_spectra(const SubDomain& omega, const BoxGrid& box, double s) {
  return compare_spectra(navier_operator(omega, s), dirichlet_operator(omega, box, s));
}

struct PositivityResult {
  double min_entry = 0.0;
  std::size_t witness = 0;
};

/// Entrywise sign of (Navier − Dirichlet)·u for u ≥ 0.
inline PositivityResult positivity_check(const SymOperator& difference, std::span<const double> u) {
  if (u.size() != difference.size()) throw std::invalid_argument("positivity_check: dimension mismatch");
  for (double v : u)
    if (v < 0.0) throw std::invalid_argument("positivity_check: input has a negative entry");
  const std::vector<double> mu = difference.apply(u);
  const auto it = std::min_element(mu.begin(), mu.end());
  return {*it, static_cast<std::size_t>(it - mu.begin())};
}

inline PositivityResult positivity_check(const SubDomain& omega, const BoxGrid& box, double s, std::span<const double> u) {
  return positivity_check(difference_operator(omega, box, s), u);
}

/// Q^D[u] ≤ Q^N[u; Ω'] ≤ Q^N[u; Ω] for Ω ⊂ Ω' ⊂ box.
struct MonotonicityTriple {
  double dirichlet = 0.0;
  double navier_outer = 0.0;
  double navier_inner = 0.0;
};

inline MonotonicityTriple monotonicity_check(const SubDomain& inner, const SubDomain& outer, const BoxGrid& box, double s,
                                             std::span<const double> u) {
  if (u.size() != inner.size()) throw std::invalid_argument("monotonicity_check: u does not match the inner domain");
  const std::vector<std::size_t> pos = [&] {
    try {
      return domain::inclusion_positions(inner, outer);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string("monotonicity_check: non-nested masks: ") + e.what());
    }
  }();
  try {
    (void)domain::embed(outer, box);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("monotonicity_check: outer domain does not fit in the box: ") + e.what());
  }
  std::vector<double> u_outer(outer.size(), 0.0);
  for (std::size_t k = 0; k < pos.size(); ++k) u_outer[pos[k]] = u[k];

  MonotonicityTriple t;
  t.dirichlet = dirichlet_operator(inner, box, s).form(u);
  t.navier_outer = navier_operator(outer, s).form(u_outer);
  t.navier_inner = navier_operator(inner, s).form(u);
  return t;
}

}  // namespace fraclap::operators
