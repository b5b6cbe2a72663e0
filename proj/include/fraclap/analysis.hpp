#pragma once

// Sobolev-constant machinery: closed-form best constant, the extremal
// profile U, L_p norms, Rayleigh quotients, quotient minimization and
// dilation sweeps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraclap/domain.hpp"
#include "fraclap/linalg.hpp"
#include "fraclap/operators.hpp"
#include "fraclap/special_functions.hpp"

namespace fraclap::analysis {

using domain::BoxGrid;
using domain::GridFunction;
using domain::SubDomain;

struct SobolevSetup {
  int n = 1;
  double s = 0.25;
  double critical_exponent = 4.0;
};

/// Requires n > 2s; 2* = 2n/(n − 2s).
inline SobolevSetup make_sobolev_setup(int n, double s) {
  if (n < 1) throw std::invalid_argument("sobolev setup: dimension must be positive");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("sobolev setup: s must lie in (0, 1)");
  if (!(n > 2.0 * s)) {
    throw std::domain_error("sobolev setup: embedding needs n > 2s (n = " + std::to_string(n) + ", s = " + std::to_string(s) + ")");
  }
  return SobolevSetup{n, s, 2.0 * n / (n - 2.0 * s)};
}

/// Best constant of the full-space fractional Sobolev inequality:
/// (4π)^s·Γ((n+2s)/2)/Γ((n−2s)/2)·[Γ(n/2)/Γ(n)]^{2s/n}.
inline double sobolev_constant_closed_form(int n, double s) {
  const SobolevSetup setup = make_sobolev_setup(n, s);
  const double nn = setup.n;
  return std::pow(4.0 * std::numbers::pi, s) * gamma(0.5 * (nn + 2.0 * s)) / gamma(0.5 * (nn - 2.0 * s)) *
         std::pow(gamma(0.5 * nn) / gamma(nn), 2.0 * s / nn);
}

/// U(x) = (1 + |x|²)^{(2s−n)/2} sampled at the grid nodes.
inline GridFunction extremal_function(const BoxGrid& grid, int n, double s) {
  if (n != grid.dim) throw std::invalid_argument("extremal_function: n must equal the grid dimension");
  (void)make_sobolev_setup(n, s);
  GridFunction u{grid, std::vector<double>(grid.size())};
  const double expo = 0.5 * (2.0 * s - n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    u.values[i] = std::pow(1.0 + p[0] * p[0] + p[1] * p[1], expo);
  }
  return u;
}

/// (h^dim·Σ|u_i|^p)^{1/p}.
inline double lp_norm(std::span<const double> u, double p, double cell_volume) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  double acc = 0.0;
  for (double v : u) acc += std::pow(std::abs(v), p);
  return std::pow(cell_volume * acc, 1.0 / p);
}

inline double lp_norm(const GridFunction& u, double p) { return lp_norm(u.values, p, u.grid.cell_volume()); }

/// Q[u]/‖u‖²_{L_p}.
inline double rayleigh_quotient(double form_value, std::span<const double> u, double p, double cell_volume) {
  const double nrm = lp_norm(u, p, cell_volume);
  if (!(nrm > 0.0)) throw std::invalid_argument("rayleigh_quotient: zero denominator");
  return form_value / (nrm * nrm);
}

struct QuotientResult {
  double value = 0.0;
  std::vector<double> minimizer;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// Minimizes Q[u]/‖u‖²_{L_p} over functions on the operator's nodes with the
/// fixed-point iteration u ← M⁻¹(|u|^{p−2}u), renormalized in L_p. Each step
/// maximizes the linearization of the convex map u ↦ ‖u‖_p^p over the
/// ellipsoid {uᵀMu = const}, so the quotient never increases; for p = 2
/// this is inverse power iteration. Converged once the relative decrease
/// drops below tol.
inline QuotientResult minimize_quotient(const operators::SymOperator& op, double p, std::span<const double> seed,
                                        int max_iter, double tol) {
  if (seed.size() != op.size()) throw std::invalid_argument("minimize_quotient: seed does not match the operator");
  if (!(p >= 2.0)) throw std::invalid_argument("minimize_quotient: p must be >= 2");
  if (op.min_eigenvalue() <= 0.0) throw std::domain_error("minimize_quotient: operator must be positive definite");
  const double cv = op.cell_volume;

  auto normalized = [&](std::vector<double> v) {
    const double nrm = lp_norm(v, p, cv);
    if (!(nrm > 0.0)) throw std::invalid_argument("minimize_quotient: seed must be nonzero");
    for (double& x : v) x /= nrm;
    return v;
  };

  QuotientResult r;
  r.minimizer = normalized(std::vector<double>(seed.begin(), seed.end()));
  r.value = op.form(r.minimizer);
  r.history.push_back(r.value);
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> g(r.minimizer.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::abs(r.minimizer[i]), p - 2.0) * r.minimizer[i];
    std::vector<double> v = normalized(linalg::spectral_apply(op.eigen, g, [](double lam) { return 1.0 / lam; }));
    const double value = op.form(v);
    r.iterations = it;
    const double decrease = (r.value - value) / r.value;
    if (decrease < 0.0) {
      // Roundoff-level increase: the current iterate is stationary.
      r.converged = -decrease < std::max(tol, 1e-12);
      break;
    }
    r.minimizer = std::move(v);
    r.value = value;
    r.history.push_back(value);
    if (decrease < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

struct SweepRow {
  double alpha = 1.0;
  double q_navier = 0.0;
  double q_dirichlet = 0.0;
  double ratio = 1.0;
  std::size_t nodes = 0;
};

/// Box for a dilation sweep: aligned with Ω's grid and covering
/// box_factor·α_max·reach(Ω).
inline BoxGrid sweep_box(const SubDomain& omega, double alpha_max, double box_factor, int max_nodes_per_axis = 16383) {
  double reach = 0.0;
  for (std::size_t node : omega.nodes()) {
    const auto pt = omega.grid().point(node);
    reach = std::max({reach, std::abs(pt[0]), std::abs(pt[1])});
  }
  reach += omega.grid().step();
  return domain::box_covering(omega.grid(), box_factor * alpha_max * reach, max_nodes_per_axis);
}

/// Q^N[u; αΩ] against Q^D[u] for each α, with u supported in Ω. Q^D uses
/// the given box, which must contain every αΩ.
inline std::vector<SweepRow> dilation_sweep(const SubDomain& omega, std::span<const double> u, double s,
                                            std::span<const double> alphas, const BoxGrid& box) {
  if (u.size() != omega.size()) throw std::invalid_argument("dilation_sweep: u does not match the domain");
  for (std::size_t k = 1; k < alphas.size(); ++k)
    if (!(alphas[k] > alphas[k - 1])) throw std::invalid_argument("dilation_sweep: alpha list must be increasing");

  const double q_dirichlet = operators::dirichlet_operator(omega, box, s).form(u);
  std::vector<SweepRow> rows;
  for (double alpha : alphas) {
    const SubDomain dilated = domain::dilate(omega, alpha, box.nodes_per_axis);
    if (!domain::aligned(dilated.grid(), box) || dilated.grid().nodes_per_axis > box.nodes_per_axis) {
      throw ResourceError("dilation_sweep: dilated domain for alpha = " + std::to_string(alpha) +
                          " does not fit in the sweep box; enlarge the box");
    }
    const std::vector<std::size_t> pos = domain::inclusion_positions(omega, dilated);
    std::vector<double> ua(dilated.size(), 0.0);
    for (std::size_t k = 0; k < pos.size(); ++k) ua[pos[k]] = u[k];
    const double qn = operators::navier_operator(dilated, s).form(ua);
    rows.push_back({alpha, qn, q_dirichlet, qn / q_dirichlet, dilated.size()});
  }
  return rows;
}

}  // namespace fraclap::analysis
