#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mognm {

/// Gaussian tail Q(x) = P{N(0,1) > x}.
[[nodiscard]] inline double q_exact(double x) noexcept { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Constants of the exponential tail fit Q(x) ~ exp(-a x^2 - b x - c), x >= 0.
struct QApproxConstants {
  static constexpr double a = 0.3842;
  static constexpr double b = 0.7640;
  static constexpr double c = 0.6964;
};

[[nodiscard]] inline double q_approx(double x) {
  if (!(x >= 0.0)) throw std::domain_error("q_approx: argument must be >= 0");
  using K = QApproxConstants;
  return std::exp(-K::a * x * x - K::b * x - K::c);
}

/// q_approx extended to the whole line by Q(-x) = 1 - Q(x).
[[nodiscard]] inline double q_approx_reflected(double x) {
  return x >= 0.0 ? q_approx(x) : 1.0 - q_approx(-x);
}

/// log(erfc(u)); uses the asymptotic series where erfc underflows.
[[nodiscard]] inline double log_erfc(double u) noexcept {
  if (u < 20.0) return std::log(std::erfc(u));
  const double r = 1.0 / (2.0 * u * u);
  // 1 - 1/(2u^2) + 3/(4u^4) - 15/(8u^6) + 105/(16u^8)
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -u * u - std::log(u * std::sqrt(std::numbers::pi)) + std::log(series);
}

}  // namespace mognm
