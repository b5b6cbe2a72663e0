// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fraclap/fraclap.hpp"

using namespace fraclap;
using domain::BoxGrid;
using domain::make_box;
using domain::make_custom;
using domain::make_shape;
using domain::parse_shape;
using domain::SubDomain;

namespace {

struct Outcome {
  Outcome() = default;
  Outcome(bool p, std::string d) : pass(p), detail(std::move(d)) {}

  bool pass = false;
  std::string detail;
  std::vector<std::string> findings;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// `count` consecutive nodes centred in the box (1D) or a count×count block (2D).
SubDomain centred_block(const BoxGrid& box, int count) {
  const int lo = (box.nodes_per_axis - count) / 2;
  std::vector<unsigned char> mask(box.size(), 0);
  for (int iy = 0; iy < (box.dim == 2 ? count : 1); ++iy)
    for (int ix = 0; ix < count; ++ix) mask[box.index(lo + ix, box.dim == 2 ? lo + iy : 0)] = 1;
  return make_custom(box, std::move(mask));
}

std::vector<double> ground_state(const SubDomain& omega) {
  const auto lap = operators::assemble_laplacian(omega);
  std::vector<double> u(lap.eigen.vector(0).begin(), lap.eigen.vector(0).end());
  for (double& v : u) v = std::abs(v);
  return u;
}

Outcome eigenvalue_domination() {
  const auto t0 = std::chrono::steady_clock::now();
  const BoxGrid b1 = make_box(1, 1.0, 128);
  const BoxGrid b2 = make_box(2, 1.0, 32);
  const SubDomain o1 = centred_block(b1, 16);
  const SubDomain o2 = centred_block(b2, 8);
  double worst = std::numeric_limits<double>::infinity();
  double worst_s = 0.0;
  double coincidence = 0.0;
  for (const auto& [om, box] : {std::pair{&o1, &b1}, std::pair{&o2, &b2}}) {
    for (int k = 1; k <= 9; ++k) {
      const double s = 0.1 * k;
      const auto cmp = operators::compare_spectra(*om, *box, s);
      if (cmp.min_margin() < worst) {
        worst = cmp.min_margin();
        worst_s = s;
      }
    }
    coincidence = std::max(coincidence, operators::compare_spectra(*om, *box, 1.0).max_abs_margin());
  }
  const double t = seconds_since(t0);
  return {worst > 1e-9 && coincidence <= 1e-10 && t <= 120.0,
          fmt("min margin %.3e (s=%.1f) > 1e-9; s=1 max |margin| %.1e <= 1e-10; %.1f s <= 120 s", worst, worst_s,
              coincidence, t)};
}

Outcome form_domination() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240101);
  std::bernoulli_distribution coin(0.5);
  const BoxGrid b1 = make_box(1, 1.0, 32);
  const BoxGrid b2 = make_box(2, 1.0, 10);
  double min_eig = std::numeric_limits<double>::infinity();
  double min_proper = std::numeric_limits<double>::infinity();
  int proper = 0, strict_failures = 0;
  Outcome out;
  for (const BoxGrid* box : {&b1, &b2}) {
    for (int t = 0; t < 50; ++t) {
      std::vector<unsigned char> mask(box->size());
      for (auto& m : mask) m = coin(rng);
      mask[box->size() / 2] = 1;
      const SubDomain om = make_custom(*box, mask);
      for (double s : {0.25, 0.5, 0.75}) {
        const double e = operators::difference_operator(om, *box, s).min_eigenvalue();
        min_eig = std::min(min_eig, e);
        if (!om.is_full_box()) {
          ++proper;
          min_proper = std::min(min_proper, e);
          if (!(e > 1e-9)) {
            ++strict_failures;
            out.findings.push_back(fmt("dim %d mask %d s=%.2f: min eigenvalue %.3e not > 1e-9 (%zu of %zu nodes)", box->dim,
                                       t, s, e, om.size(), box->size()));
          }
        }
      }
    }
  }
  const double t = seconds_since(t0);
  out.pass = min_eig >= -1e-10 && strict_failures == 0 && t <= 300.0;
  out.detail = fmt("min eigenvalue %.3e >= -1e-10; proper inclusions: min %.3e, %d of %d not > 1e-9; %.1f s <= 300 s",
                   min_eig, min_proper, strict_failures, proper, t);
  return out;
}

Outcome positivity() {
  const BoxGrid box = make_box(1, 1.0, 128);
  const SubDomain om = centred_block(box, 16);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  Outcome out;
  for (double s : {0.25, 0.5, 0.75}) {
    const auto diff = operators::difference_operator(om, box, s);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> u(om.size());
      for (double& v : u) v = unif(rng);
      const double n = std::sqrt(box.cell_volume()) * linalg::norm2(u);
      for (double& v : u) v /= n;
      const auto r = operators::positivity_check(diff, u);
      worst = std::min(worst, r.min_entry);
      if (r.min_entry < -1e-8)
        out.findings.push_back(fmt("s=%.2f trial %d: entry %.3e at node %zu", s, t, r.min_entry, r.witness));
    }
  }
  out.pass = worst >= -1e-8;
  out.detail = fmt("min entry %.3e >= -1e-8 over 300 inputs; %zu violations", worst, out.findings.size());
  return out;
}

Outcome monotone_chain() {
  std::mt19937_64 rng(4242);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const BoxGrid box = make_box(1, 1.0, 40);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 50; ++t) {
    std::vector<unsigned char> inner(box.size()), outer(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
      inner[i] = coin(rng);
      outer[i] = inner[i] || coin(rng);
    }
    inner[box.size() / 2] = outer[box.size() / 2] = 1;
    const SubDomain in = make_custom(box, inner);
    const SubDomain out = make_custom(box, outer);
    std::vector<double> u(in.size());
    for (double& v : u) v = unif(rng);
    for (double s : {0.25, 0.5, 0.75}) {
      const auto r = operators::monotonicity_check(in, out, box, s, u);
      worst = std::min(worst, std::min(r.navier_outer - r.dirichlet, r.navier_inner - r.navier_outer) / r.navier_inner);
    }
  }
  return {worst >= -1e-10, fmt("min relative chain margin %.3e >= -1e-10 over 50 pairs x 3 s", worst)};
}

Outcome dilation_limit() {
  const BoxGrid g = make_box(1, 1.0, 127);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.125,0.125"));
  const std::vector<double> u = ground_state(om);
  const std::vector<double> alphas{1, 2, 4, 8, 16};
  const auto rows = analysis::dilation_sweep(om, u, 0.5, alphas, analysis::sweep_box(om, 16.0, 4.0));
  bool decreasing = true;
  double min_drop = std::numeric_limits<double>::infinity();
  std::string ratios;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ratios += fmt("%s%.6f", k ? "," : "", rows[k].ratio);
    if (k) {
      min_drop = std::min(min_drop, rows[k - 1].ratio - rows[k].ratio);
      decreasing = decreasing && rows[k].ratio < rows[k - 1].ratio;
    }
  }
  const double final_ratio = rows.back().ratio;
  return {decreasing && final_ratio <= 1.05,
          fmt("ratios [%s], min drop %.3e > 0, final %.6f <= 1.05", ratios.c_str(), min_drop, final_ratio)};
}

Outcome extension_energy() {
  const auto t0 = std::chrono::steady_clock::now();
  const BoxGrid box = make_box(1, 2.0, 511);
  const SubDomain om = make_shape(box, parse_shape("interval:0,1"));
  std::vector<double> u(om.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(std::numbers::pi * box.point(om.nodes()[i])[0]);
  const double target = 0.5 * std::numbers::pi;
  const auto coarse =
      extension::energy_identity_check(om, u, extension::ExtensionVariant::navier, box, 0.5, extension::make_graded_mesh(8.0, 32, 2.0));
  const auto fine =
      extension::energy_identity_check(om, u, extension::ExtensionVariant::navier, box, 0.5, extension::make_graded_mesh(8.0, 128, 2.0));
  const double q_gap = std::abs(fine.form_value - target) / target;
  const double e_gap = std::abs(fine.scaled_energy - target) / target;
  const double factor = coarse.relative_gap / fine.relative_gap;
  const double t = seconds_since(t0);
  return {om.size() == 127 && q_gap <= 0.03 && e_gap <= 0.03 && factor >= 1.5 && t <= 60.0,
          fmt("%zu nodes; Q=%.6f (%.2e), energy=%.6f (%.2e) vs pi/2 <= 3%%; identity gap %.2e (M=32) -> %.2e (M=128), factor "
              "%.1f >= 1.5; %.1f s <= 60 s",
              om.size(), fine.form_value, q_gap, fine.scaled_energy, e_gap, coarse.relative_gap, fine.relative_gap, factor, t)};
}

Outcome extension_ordering() {
  const BoxGrid box = make_box(1, 1.0, 128);
  const SubDomain om = make_shape(box, parse_shape("interval:-0.25,0.25"));
  const std::vector<double> u = ground_state(om);
  double min_all = std::numeric_limits<double>::infinity();
  double min_interior = std::numeric_limits<double>::infinity();
  for (double s : {0.25, 0.5, 0.75}) {
    const auto mesh = extension::make_graded_mesh(8.0 * om.shape().diameter(), 128, extension::default_grading(s));
    const auto r = extension::extension_ordering_check(om, u, box, s, mesh);
    min_all = std::min(min_all, r.min_difference);
    min_interior = std::min(min_interior, r.min_interior_difference);
  }
  return {min_all >= -1e-8 && min_interior > 0.0,
          fmt("min W %.3e >= -1e-8; min interior W %.3e > 0", min_all, min_interior)};
}

double extremal_quotient(double halfwidth, int nodes) {
  const BoxGrid g = make_box(1, halfwidth, nodes);
  const SubDomain support = make_shape(g, domain::Shape{domain::ShapeKind::interval, {-0.5 * halfwidth, 0.5 * halfwidth}});
  domain::GridFunction u = analysis::extremal_function(g, 1, 0.25);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    if (!support.contains_node(i)) u.values[i] = 0.0;
  return analysis::rayleigh_quotient(operators::fourier_form(u, support, 0.25), u.values, 4.0, g.cell_volume());
}

Outcome sobolev_constant() {
  const auto t0 = std::chrono::steady_clock::now();
  const double S = analysis::sobolev_constant_closed_form(1, 0.25);
  const double q1 = extremal_quotient(40.0, 2047);
  const double q2 = extremal_quotient(80.0, 4095);
  const double g1 = std::abs(q1 - S) / S;
  const double g2 = std::abs(q2 - S) / S;
  const double t = seconds_since(t0);
  return {g1 <= 0.10 && g2 < g1 && t <= 180.0,
          fmt("S(1,0.25)=%.6f; quotient %.6f (gap %.2e <= 0.10) at L=40, %.6f (gap %.2e) at L=80; %.1f s <= 180 s", S, q1, g1,
              q2, g2, t)};
}

Outcome navier_decrease() {
  const double S = analysis::sobolev_constant_closed_form(1, 0.25);
  const BoxGrid g = make_box(1, 1.0, 127);
  const SubDomain om = make_shape(g, parse_shape("interval:-0.1328125,0.1171875"));
  std::vector<double> seed = ground_state(om);
  const SubDomain* prev = &om;
  std::vector<SubDomain> kept;
  kept.reserve(4);
  std::string values;
  bool nonincreasing = true;
  double last = std::numeric_limits<double>::infinity();
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    kept.push_back(domain::dilate(om, alpha));
    const SubDomain& dil = kept.back();
    const auto pos = domain::inclusion_positions(*prev, dil);
    std::vector<double> start(dil.size(), 0.0);
    for (std::size_t k = 0; k < pos.size(); ++k) start[pos[k]] = seed[k];
    const auto r = analysis::minimize_quotient(operators::navier_operator(dil, 0.25), 4.0, start, 500, 1e-10);
    values += fmt("%s%.6f", values.empty() ? "" : ",", r.value);
    nonincreasing = nonincreasing && r.value <= last;
    last = r.value;
    seed = r.minimizer;
    prev = &dil;
  }
  const double gap = std::abs(last - S) / S;
  return {om.size() == 16 && nonincreasing && gap <= 0.15,
          fmt("%zu-node domain; quotients [%s] nonincreasing; final gap %.2e <= 0.15", om.size(), values.c_str(), gap)};
}

Outcome infrastructure() {
  namespace fx = experiment;
  const auto cfg = fx::parse_config("seed = 3\nshape = interval:-0.25,0.25\nbox.nodes = 63\ntrials = 5\ns = 0.25,0.75\n",
                                    fx::ExperimentKind::positivity);
  const auto dir = std::filesystem::temp_directory_path() / "fraclap_acceptance";
  std::filesystem::remove_all(dir);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const auto a = fx::write_report(fx::run(cfg), dir / "a");
  const auto b = fx::write_report(fx::run(cfg), dir / "b");
  bool identical = a.size() == b.size();
  for (std::size_t k = 0; identical && k < a.size(); ++k) identical = slurp(a[k]) == slurp(b[k]) && !slurp(a[k]).empty();
  std::filesystem::remove_all(dir);

  double rec = 0.0;
  for (double x = 0.05; x < 60.0; x += 0.05) rec = std::max(rec, std::abs(analysis::gamma(x + 1.0) / (x * analysis::gamma(x)) - 1.0));
  const double c_half = std::abs(analysis::extension_constant(0.5) - 1.0);
  return {identical && rec <= 1e-12 && c_half <= 1e-12,
          fmt("reports byte-identical: %s; gamma recurrence max rel err %.1e <= 1e-12; |C_1/2 - 1| = %.1e <= 1e-12",
              identical ? "yes" : "no", rec, c_half)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"eigenvalue domination", eigenvalue_domination},
      {"form domination", form_domination},
      {"positivity preservation", positivity},
      {"domain monotonicity chain", monotone_chain},
      {"dilation limit", dilation_limit},
      {"extension energy identity", extension_energy},
      {"extension ordering", extension_ordering},
      {"sobolev constant", sobolev_constant},
      {"navier quotient decrease", navier_decrease},
      {"infrastructure", infrastructure},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu [%s] %s: %s\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str());
    for (const auto& f : o.findings) std::printf("    finding: %s\n", f.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
