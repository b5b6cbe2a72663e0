#pragma once

// Weighted extension problem −div(y^{1−2s}∇w) = 0 on (lattice)×(0, Y):
// w = u at y = 0, w = 0 at the truncation height and, for the Navier
// variant, w = 0 on the lateral boundary of Ω. The Dirichlet variant lives
// on the whole box with u extended by zero.
//
// Discretization: P1 elements in y with the weight integrated exactly
// (stiffness, lumped mass), central differences in x. The lattice operator
// K⊗I + M⊗A is an M-matrix. It is solved by diagonalizing A and running
// one tridiagonal solve per lateral mode.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/domain.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/linalg.hpp"
#include "fraclap/operators.hpp"
#include "fraclap/special_functions.hpp"

namespace fraclap::extension {

using domain::BoxGrid;
using domain::SubDomain;

/// Graded nodes y_k = Y·(k/M)^γ.
struct ExtensionMesh {
  std::vector<double> y;
  double grading = 2.0;
  double height = 1.0;

  std::size_t cells() const noexcept { return y.size() - 1; }
};

inline ExtensionMesh make_graded_mesh(double height, int cells, double grading) {
  if (!(height > 0.0)) throw std::invalid_argument("extension mesh: height must be positive");
  if (cells < 4) throw std::invalid_argument("extension mesh too coarse: need at least 4 cells, got " + std::to_string(cells));
  if (!(grading >= 1.0)) throw std::invalid_argument("extension mesh: grading exponent must be >= 1");
  ExtensionMesh m{std::vector<double>(static_cast<std::size_t>(cells) + 1), grading, height};
  for (int k = 0; k <= cells; ++k) m.y[k] = height * std::pow(static_cast<double>(k) / cells, grading);
  m.y.back() = height;
  return m;
}

/// max(2, 1/(1−s)): clusters enough layers inside the y^{2s} boundary layer.
inline double default_grading(double s) { return std::max(2.0, 1.0 / (1.0 - s)); }

enum class ExtensionVariant { navier, dirichlet };

inline const char* to_string(ExtensionVariant v) { return v == ExtensionVariant::navier ? "navier" : "dirichlet"; }

/// Per-cell weighted stiffness ∫ y^{1−2s} dy / Δ² and per-node lumped
/// weighted mass ∫ y^{1−2s} φ_k dy.
struct WeightedYMatrices {
  std::vector<double> stiffness;
  std::vector<double> mass;
};

inline WeightedYMatrices weighted_y_matrices(const ExtensionMesh& mesh, double s) {
  const double beta = 1.0 - 2.0 * s;
  const std::size_t cells = mesh.cells();
  WeightedYMatrices out{std::vector<double>(cells), std::vector<double>(cells + 1, 0.0)};
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = mesh.y[c];
    const double b = mesh.y[c + 1];
    const double d = b - a;
    const double i0 = (std::pow(b, beta + 1.0) - std::pow(a, beta + 1.0)) / (beta + 1.0);
    const double i1 = (std::pow(b, beta + 2.0) - std::pow(a, beta + 2.0)) / (beta + 2.0);
    out.stiffness[c] = i0 / (d * d);
    out.mass[c] += (b * i0 - i1) / d;
    out.mass[c + 1] += (i1 - a * i0) / d;
  }
  return out;
}

struct ExtensionSolution {
  ExtensionVariant variant = ExtensionVariant::navier;
  double s = 0.5;
  ExtensionMesh mesh;
  BoxGrid grid;
  /// Box indices of the lateral lattice nodes (Ω for Navier, the whole box
  /// for Dirichlet).
  std::vector<std::size_t> lattice_nodes;
  /// w[i·(M+1) + k] = w(x_i, y_k).
  std::vector<double> w;
  double energy = 0.0;
  double residual = 0.0;

  std::size_t nodes() const noexcept { return lattice_nodes.size(); }
  std::size_t layers() const noexcept { return mesh.y.size(); }
  double at(std::size_t i, std::size_t k) const { return w[i * layers() + k]; }
  std::span<const double> column(std::size_t i) const { return {w.data() + i * layers(), layers()}; }
};

namespace detail {

struct LateralStencil {
  double inv_h2 = 1.0;
  int dim = 1;
  std::vector<std::vector<std::size_t>> neighbours;  // lattice positions
};

inline LateralStencil lateral_stencil(const SubDomain& lattice) {
  LateralStencil st;
  const double h = lattice.grid().step();
  st.inv_h2 = 1.0 / (h * h);
  st.dim = lattice.grid().dim;
  st.neighbours.resize(lattice.size());
  for (std::size_t r = 0; r < lattice.size(); ++r)
    for (std::size_t nb : lattice.neighbours(lattice.nodes()[r])) {
      const std::size_t c = lattice.position(nb);
      if (c < lattice.size()) st.neighbours[r].push_back(c);
    }
  return st;
}

/// (A v)_r for the lattice Laplacian, reading v with a stride.
template <class Get>
double stencil_apply(const LateralStencil& st, std::size_t r, Get&& v) {
  double acc = 2.0 * st.dim * v(r);
  for (std::size_t c : st.neighbours[r]) acc -= v(c);
  return acc * st.inv_h2;
}

inline ExtensionSolution solve_on_lattice(const SubDomain& lattice, std::span<const double> u, ExtensionVariant variant,
                                          double s, const ExtensionMesh& mesh) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("solve_extension: s must lie in (0, 1)");
  if (mesh.cells() < 4) throw std::invalid_argument("solve_extension: mesh too coarse (need at least 4 cells)");
  const std::size_t n = lattice.size();
  const std::size_t layers = mesh.y.size();
  const std::size_t cells = mesh.cells();

  const operators::SymOperator lap = operators::assemble_laplacian(lattice);
  const WeightedYMatrices ym = weighted_y_matrices(mesh, s);

  std::vector<double> coeff(n);
  for (std::size_t j = 0; j < n; ++j) coeff[j] = linalg::dot(lap.eigen.vector(j), u);

  // Modal profiles g_j(y_k), g_j(0) = 1, g_j(Y) = 0.
  const std::size_t inner = cells - 1;
  std::vector<double> diag(inner), off(inner - 1), rhs(inner, 0.0);
  std::vector<double> w(n * layers, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (coeff[j] == 0.0) continue;
    const double lam = lap.eigen.values[j];
    for (std::size_t k = 1; k < cells; ++k) {
      diag[k - 1] = ym.stiffness[k - 1] + ym.stiffness[k] + lam * ym.mass[k];
      if (k + 1 < cells) off[k - 1] = -ym.stiffness[k];
    }
    std::fill(rhs.begin(), rhs.end(), 0.0);
    rhs[0] = ym.stiffness[0];
    const std::vector<double> g = linalg::solve_tridiagonal_spd(diag, off, rhs);
    const auto q = lap.eigen.vector(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = coeff[j] * q[i];
      if (a == 0.0) continue;
      double* wi = w.data() + i * layers;
      for (std::size_t k = 1; k < cells; ++k) wi[k] += a * g[k - 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    w[i * layers] = u[i];
    w[i * layers + cells] = 0.0;
  }

  const LateralStencil st = lateral_stencil(lattice);
  auto layer_value = [&](std::size_t k) { return [&, k](std::size_t r) { return w[r * layers + k]; }; };

  // Energy and residual of the full lattice system.
  double grad_y = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < cells; ++c) {
      const double d = w[i * layers + c + 1] - w[i * layers + c];
      grad_y += ym.stiffness[c] * d * d;
    }
  double grad_x = 0.0;
  double res2 = 0.0;
  for (std::size_t k = 0; k < layers; ++k) {
    const auto get = layer_value(k);
    for (std::size_t r = 0; r < n; ++r) {
      const double av = stencil_apply(st, r, get);
      grad_x += ym.mass[k] * get(r) * av;
      if (k >= 1 && k < cells) {
        const double* wr = w.data() + r * layers;
        const double ry = -ym.stiffness[k - 1] * wr[k - 1] + (ym.stiffness[k - 1] + ym.stiffness[k]) * wr[k] -
                          ym.stiffness[k] * wr[k + 1];
        const double ri = ry + ym.mass[k] * av;
        res2 += ri * ri;
      }
    }
  }
  const double rhs_norm = ym.stiffness[0] * linalg::norm2(u);
  const double residual = rhs_norm > 0.0 ? std::sqrt(res2) / rhs_norm : std::sqrt(res2);
  if (residual > 1e-10) {
    throw ConvergenceError("solve_extension: lattice residual " + std::to_string(residual) + " above 1e-10", residual);
  }

  ExtensionSolution sol;
  sol.variant = variant;
  sol.s = s;
  sol.mesh = mesh;
  sol.grid = lattice.grid();
  sol.lattice_nodes.assign(lattice.nodes().begin(), lattice.nodes().end());
  sol.w = std::move(w);
  sol.energy = lattice.grid().cell_volume() * (grad_y + grad_x);
  sol.residual = residual;
  return sol;
}

}  // namespace detail

/// Navier variant: lateral zero data on ∂Ω, u given on the nodes of Ω.
inline ExtensionSolution solve_navier_extension(const SubDomain& omega, std::span<const double> u, double s,
                                                const ExtensionMesh& mesh) {
  if (u.size() != omega.size()) throw std::invalid_argument("solve_extension: u does not match the domain");
  return detail::solve_on_lattice(omega, u, ExtensionVariant::navier, s, mesh);
}

/// Dirichlet variant: the whole box, with u extended by zero outside Ω.
inline ExtensionSolution solve_dirichlet_extension(const SubDomain& omega, std::span<const double> u, const BoxGrid& box,
                                                   double s, const ExtensionMesh& mesh) {
  if (u.size() != omega.size()) throw std::invalid_argument("solve_extension: u does not match the domain");
  const SubDomain inner = domain::embed(omega, box);
  const domain::GridFunction ext = domain::extend_by_zero(inner, u);
  return detail::solve_on_lattice(domain::full_box(box), ext.values, ExtensionVariant::dirichlet, s, mesh);
}

inline ExtensionSolution solve_extension(const SubDomain& omega, std::span<const double> u, ExtensionVariant variant,
                                         const BoxGrid& box, double s, const ExtensionMesh& mesh) {
  return variant == ExtensionVariant::navier ? solve_navier_extension(omega, u, s, mesh)
                                             : solve_dirichlet_extension(omega, u, box, s, mesh);
}

/// Least-squares slope of w(x, y_k) − w(x, 0) against y_k^{2s} over layers 1..4.
inline std::vector<double> fitted_slope(const ExtensionSolution& sol, std::span<const double> values, std::size_t layers) {
  const std::size_t usable = std::min<std::size_t>(4, sol.mesh.cells() - 1);
  if (usable < 3) throw std::invalid_argument("trace fit ill-conditioned: fewer than 3 usable layers");
  std::vector<double> t(usable + 1);
  double tt = 0.0;
  for (std::size_t k = 1; k <= usable; ++k) {
    t[k] = std::pow(sol.mesh.y[k], 2.0 * sol.s);
    tt += t[k] * t[k];
  }
  const std::size_t n = values.size() / layers;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* col = values.data() + i * layers;
    double acc = 0.0;
    for (std::size_t k = 1; k <= usable; ++k) acc += t[k] * (col[k] - col[0]);
    c[i] = acc / tt;
  }
  return c;
}

/// −C_s·c(x) where w(x, y) ≈ u(x) + c(x)·y^{2s} near y = 0; one value per
/// lattice node.
inline std::vector<double> trace_limit(const ExtensionSolution& sol) {
  std::vector<double> c = fitted_slope(sol, sol.w, sol.layers());
  const double cs = analysis::extension_constant(sol.s);
  for (double& v : c) v *= -cs;
  return c;
}

/// trace_limit restricted to the nodes of Ω (identity for the Navier variant).
inline std::vector<double> trace_on(const ExtensionSolution& sol, const SubDomain& omega) {
  const std::vector<double> full = trace_limit(sol);
  if (sol.variant == ExtensionVariant::navier) return full;
  const SubDomain inner = domain::embed(omega, sol.grid);
  std::vector<double> out(inner.size());
  for (std::size_t k = 0; k < inner.size(); ++k) out[k] = full[inner.nodes()[k]];
  return out;
}

struct IdentityCheck {
  double form_value = 0.0;
  double scaled_energy = 0.0;
  double relative_gap = 0.0;
  ExtensionSolution solution;
};

/// Q_s[u] against (C_s/2s)·ℰ(w), with Q_s the matching matrix form.
inline IdentityCheck energy_identity_check(const SubDomain& omega, std::span<const double> u, ExtensionVariant variant,
                                           const BoxGrid& box, double s, const ExtensionMesh& mesh) {
  IdentityCheck out;
  out.solution = solve_extension(omega, u, variant, box, s, mesh);
  out.form_value = variant == ExtensionVariant::navier ? operators::navier_operator(omega, s).form(u)
                                                       : operators::dirichlet_operator(omega, box, s).form(u);
  out.scaled_energy = analysis::extension_constant(s) / (2.0 * s) * out.solution.energy;
  const double scale = std::abs(out.form_value);
  out.relative_gap = scale > 0.0 ? std::abs(out.scaled_energy - out.form_value) / scale
                                 : std::abs(out.scaled_energy - out.form_value);
  return out;
}

struct OrderingResult {
  /// min of W = w^D − w^N over Ω × [0, Y].
  double min_difference = 0.0;
  /// min of W over Ω × (0, Y).
  double min_interior_difference = 0.0;
  /// C_s·(fitted slope of W against y^{2s}) on the nodes of Ω.
  std::vector<double> fitted_trace;
  ExtensionSolution navier;
  ExtensionSolution dirichlet;
};

inline OrderingResult extension_ordering_check(const SubDomain& omega, std::span<const double> u, const BoxGrid& box, double s,
                                               const ExtensionMesh& mesh) {
  for (double v : u)
    if (v < 0.0) throw std::invalid_argument("extension_ordering_check: u must be nonnegative");
  OrderingResult out;
  out.navier = solve_navier_extension(omega, u, s, mesh);
  out.dirichlet = solve_dirichlet_extension(omega, u, box, s, mesh);

  const SubDomain inner = domain::embed(omega, box);
  const std::size_t layers = mesh.y.size();
  std::vector<double> diff(inner.size() * layers);
  out.min_difference = std::numeric_limits<double>::infinity();
  out.min_interior_difference = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const std::size_t box_pos = inner.nodes()[i];
    for (std::size_t k = 0; k < layers; ++k) {
      const double d = out.dirichlet.at(box_pos, k) - out.navier.at(i, k);
      diff[i * layers + k] = d;
      out.min_difference = std::min(out.min_difference, d);
      if (k > 0 && k + 1 < layers) out.min_interior_difference = std::min(out.min_interior_difference, d);
    }
  }
  out.fitted_trace = fitted_slope(out.navier, diff, layers);
  const double cs = analysis::extension_constant(s);
  for (double& v : out.fitted_trace) v *= cs;
  return out;
}

}  // namespace fraclap::extension
