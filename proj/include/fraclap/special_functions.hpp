#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fraclap::analysis {

namespace detail {

// Lanczos approximation, N = 13, g ≈ 6.0247, tuned for 53-bit doubles
// (coefficients as published in Boost.Math, lanczos13m53).
inline constexpr double kLanczosG = 6.024680040776729583740234375;

inline double lanczos_sum(double z) {
  static constexpr double num[13] = {
      23531376880.41075968857200767445163675473, 42919803642.64909876895789904700198885093,
      35711959237.35566804944018545154716670596, 17921034426.03720969991975575445893111267,
      6039542586.35202800506429164430729792107,  1439720407.311721673663223072794912393972,
      248874557.8620541565114603864132294232163, 31426415.58540019438061423162831820536287,
      2876370.628935372441225409051620849613599, 186056.2653952234950402949897160456992822,
      8071.672002365816210638002902272250613822, 210.8242777515793458725097339207133627117,
      2.506628274631000270164908177133837338626};
  static constexpr double denom[13] = {0.0,       39916800.0, 120543840.0, 150917976.0, 105258076.0,
                                       45995730.0, 13339535.0, 2637558.0,   357423.0,    32670.0,
                                       1925.0,     66.0,       1.0};
  // Ratio of polynomials in z; for z > 1 evaluate in 1/z to stay in range.
  double n = 0.0, d = 0.0;
  if (z <= 1.0) {
    for (int i = 12; i >= 0; --i) {
      n = n * z + num[i];
      d = d * z + denom[i];
    }
  } else {
    const double r = 1.0 / z;
    for (int i = 0; i <= 12; ++i) {
      n = n * r + num[i];
      d = d * r + denom[i];
    }
  }
  return n / d;
}

}  // namespace detail

/// Γ(x) for x > 0; reflection Γ(x)Γ(1−x) = π/sin(πx) below 1/2.
inline double gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("gamma: argument must be positive and finite");
  if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma(1.0 - x));
  if (x > 171.6) throw std::overflow_error("gamma: result overflows double");
  const double zgh = x + detail::kLanczosG - 0.5;
  if (x < 140.0) return detail::lanczos_sum(x) * std::pow(zgh, x - 0.5) / std::exp(zgh);
  const double half = std::pow(zgh, 0.5 * x - 0.25);
  return detail::lanczos_sum(x) * (half / std::exp(zgh)) * half;
}

/// C_s = 4^s Γ(1+s) / Γ(1−s), the constant linking the weighted extension
/// energy to the fractional form.
inline double extension_constant(double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("extension_constant: s must lie in (0, 1), got " + std::to_string(s));
  return std::pow(4.0, s) * gamma(1.0 + s) / gamma(1.0 - s);
}

}  // namespace fraclap::analysis
