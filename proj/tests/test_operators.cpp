#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fraclap/errors.hpp"
#include "fraclap/operators.hpp"

using namespace fraclap;
using namespace fraclap::operators;
using domain::BoxGrid;
using domain::make_box;
using domain::make_custom;
using domain::make_shape;
using domain::parse_shape;
using domain::SubDomain;

namespace {

// Independent reference: P·(B^s)·Pᵀ with B^s from Jacobi on the box stencil.
linalg::SymMatrix reference_dirichlet(const SubDomain& omega, const BoxGrid& box, double s) {
  const SubDomain full = domain::full_box(box);
  const auto bm = detail::stencil_matrix(full);
  const auto bs = linalg::spectral_power(linalg::eigendecompose(bm), s);
  const SubDomain inner = domain::embed(omega, box);
  const std::size_t m = inner.size();
  std::vector<double> a(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a[i * m + j] = bs(inner.nodes()[i], inner.nodes()[j]);
  return linalg::SymMatrix::symmetrized(m, std::move(a));
}

double max_entry_gap(const linalg::SymMatrix& a, const linalg::SymMatrix& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) gap = std::max(gap, std::abs(a(i, j) - b(i, j)));
  return gap;
}

SubDomain random_mask(const BoxGrid& g, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<unsigned char> mask(g.size());
  for (auto& m : mask) m = coin(rng);
  mask[0] = 1;
  return make_custom(g, mask);
}

}  // namespace

TEST(Laplacian, ClosedFormSpectrumOnInterval) {
  const BoxGrid g = make_box(1, 1.0, 31);
  const auto lap = assemble_laplacian(make_shape(g, parse_shape("interval:-0.5,0.5")));
  const std::size_t n = lap.size();
  const double h = g.step();
  for (std::size_t k = 1; k <= n; ++k)
    EXPECT_NEAR(lap.eigen.values[k - 1], (2.0 - 2.0 * std::cos(k * std::numbers::pi / (n + 1))) / (h * h), 1e-9);
}

TEST(Laplacian, SineBasisAgreesWithJacobi) {
  const BoxGrid g = make_box(2, 1.0, 9);
  const SubDomain sq = make_shape(g, parse_shape("square:1.5"));
  const auto lap = assemble_laplacian(sq);
  const auto jac = linalg::eigendecompose(lap.matrix);
  for (std::size_t j = 0; j < lap.size(); ++j) EXPECT_NEAR(lap.eigen.values[j], jac.values[j], 1e-9 * jac.values.back());
  // Eigenvector check: M φ = λ φ.
  for (std::size_t j = 0; j < lap.size(); ++j) {
    const auto mv = lap.apply(lap.eigen.vector(j));
    for (std::size_t i = 0; i < lap.size(); ++i) EXPECT_NEAR(mv[i], lap.eigen.values[j] * lap.eigen.component(i, j), 1e-9);
  }
}

TEST(Navier, EigenvaluesArePowersAndSOneIsTheStencil) {
  const BoxGrid g = make_box(2, 1.0, 9);
  const SubDomain om = make_shape(g, parse_shape("lshape:2"));
  const auto lap = assemble_laplacian(om);
  const auto nav = navier_operator(om, 0.3);
  for (std::size_t j = 0; j < lap.size(); ++j) EXPECT_NEAR(nav.eigen.values[j], std::pow(lap.eigen.values[j], 0.3), 1e-10);
  const auto one = navier_operator(om, 1.0);
  EXPECT_EQ(max_entry_gap(one.matrix, lap.matrix), 0.0);
  EXPECT_THROW(navier_operator(om, 0.0), std::invalid_argument);
  EXPECT_THROW(navier_operator(om, 1.2), std::invalid_argument);
}

TEST(Dirichlet, MatchesIndependentConstruction) {
  const BoxGrid g1 = make_box(1, 1.0, 31);
  const SubDomain i1 = make_shape(g1, parse_shape("interval:-0.3,0.2"));
  const BoxGrid g2 = make_box(2, 1.0, 9);
  const SubDomain l2 = make_shape(g2, parse_shape("lshape:1.2"));
  for (double s : {0.2, 0.5, 0.85}) {
    const auto d1 = dirichlet_operator(i1, g1, s);
    EXPECT_LT(max_entry_gap(d1.matrix, reference_dirichlet(i1, g1, s)), 1e-9 * d1.matrix.max_abs());
    const auto d2 = dirichlet_operator(l2, g2, s);
    EXPECT_LT(max_entry_gap(d2.matrix, reference_dirichlet(l2, g2, s)), 1e-9 * d2.matrix.max_abs());
  }
}

TEST(Dirichlet, FullBoxCoincidesWithNavier) {
  const BoxGrid g = make_box(1, 1.0, 21);
  const SubDomain full = domain::full_box(g);
  const auto d = dirichlet_operator(full, g, 0.4);
  const auto n = navier_operator(full, 0.4);
  EXPECT_LT(max_entry_gap(d.matrix, n.matrix), 1e-12 * n.matrix.max_abs());
}

TEST(Dirichlet, SOneIsTheRestrictedStencil) {
  const BoxGrid g = make_box(1, 1.0, 31);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.5,0.5"));
  EXPECT_EQ(max_entry_gap(dirichlet_operator(om, g, 1.0).matrix, assemble_laplacian(om).matrix), 0.0);
}

TEST(Dirichlet, RejectsDomainsOutsideTheBox) {
  const BoxGrid g = make_box(1, 1.0, 31);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.5,0.5"));
  EXPECT_THROW(dirichlet_operator(om, make_box(1, 1.0, 30), 0.5), std::invalid_argument);
}

TEST(FourierForm, PureSineModes) {
  // u(x) = sin(πm(x+L)/L) is a single periodic mode: Q = (πm/L)^{2s}·L.
  const BoxGrid g = make_box(1, 2.0, 63);
  const SubDomain full = domain::full_box(g);
  for (int m : {1, 3, 10}) {
    domain::GridFunction u{g, std::vector<double>(g.size())};
    for (std::size_t i = 0; i < g.size(); ++i)
      u.values[i] = std::sin(std::numbers::pi * m * (g.point(i)[0] + g.halfwidth) / g.halfwidth);
    for (double s : {0.25, 0.5, 1.0})
      EXPECT_NEAR(fourier_form(u, full, s) / (std::pow(std::numbers::pi * m / g.halfwidth, 2.0 * s) * g.halfwidth), 1.0,
                  1e-12);
  }
}

TEST(FourierForm, TwoDimensionalProductMode) {
  const BoxGrid g = make_box(2, 1.0, 15);
  const SubDomain full = domain::full_box(g);
  domain::GridFunction u{g, std::vector<double>(g.size())};
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.point(i);
    u.values[i] = std::sin(pi * (p[0] + 1.0)) * std::sin(2.0 * pi * (p[1] + 1.0));
  }
  // Four modes (±1, ±2) share |ξ|² = 5π²; Σu²·h² = L² = 1.
  EXPECT_NEAR(fourier_form(u, full, 0.5), std::sqrt(5.0) * pi, 1e-10);
}

TEST(FourierForm, RequiresSupportInDomain) {
  const BoxGrid g = make_box(1, 1.0, 15);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.5,0.5"));
  domain::GridFunction u{g, std::vector<double>(g.size(), 1.0)};
  EXPECT_THROW(fourier_form(u, om, 0.5), std::invalid_argument);
}

TEST(Difference, PositiveSemidefiniteOnRandomMasks) {
  std::mt19937_64 rng(1234);
  const BoxGrid g1 = make_box(1, 1.0, 24);
  const BoxGrid g2 = make_box(2, 1.0, 6);
  for (int t = 0; t < 8; ++t)
    for (const BoxGrid* g : {&g1, &g2}) {
      const SubDomain om = random_mask(*g, rng);
      for (double s : {0.25, 0.5, 0.75}) EXPECT_GE(difference_operator(om, *g, s).min_eigenvalue(), -1e-10);
    }
}

TEST(Difference, SpectraInterlaceWithPositiveMargins) {
  const BoxGrid g = make_box(1, 1.0, 31);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.3,0.3"));
  for (double s : {0.25, 0.75}) {
    const auto cmp = compare_spectra(om, g, s);
    EXPECT_GT(cmp.min_margin(), 0.0);
  }
  EXPECT_LE(compare_spectra(om, g, 1.0).max_abs_margin(), 1e-10);
}

TEST(Difference, PositivityPreserving) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const BoxGrid g = make_box(1, 1.0, 63);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.25,0.25"));
  for (double s : {0.25, 0.5, 0.75}) {
    const auto diff = difference_operator(om, g, s);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> u(om.size());
      for (double& v : u) v = unif(rng);
      EXPECT_GE(positivity_check(diff, u).min_entry, -1e-8);
    }
  }
  EXPECT_THROW(positivity_check(difference_operator(om, g, 0.5), std::vector<double>(om.size(), -1.0)),
               std::invalid_argument);
}

TEST(Monotonicity, ChainHoldsForNestedMasks) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const BoxGrid g = make_box(1, 1.0, 40);
  const SubDomain inner = make_shape(g, parse_shape("interval:-0.3,0.3"));
  for (int t = 0; t < 10; ++t) {
    std::vector<unsigned char> mask(inner.mask().begin(), inner.mask().end());
    for (auto& m : mask) m = m || coin(rng);
    const SubDomain outer = make_custom(g, mask);
    std::vector<double> u(inner.size());
    for (double& v : u) v = unif(rng);
    for (double s : {0.25, 0.5, 0.75}) {
      const auto r = monotonicity_check(inner, outer, g, s, u);
      EXPECT_LE(r.dirichlet, r.navier_outer * (1.0 + 1e-10));
      EXPECT_LE(r.navier_outer, r.navier_inner * (1.0 + 1e-10));
    }
  }
  EXPECT_THROW(monotonicity_check(make_custom(g, std::vector<unsigned char>(40, 1)), inner, g, 0.5,
                                  std::vector<double>(40, 1.0)),
               std::invalid_argument);
}

TEST(Resources, DenseLimitIsReported) {
  const BoxGrid g = make_box(1, 1.0, 5000);
  std::vector<unsigned char> mask(5000, 1);
  mask[10] = 0;
  EXPECT_THROW(assemble_laplacian(make_custom(g, mask)), ResourceError);
}
