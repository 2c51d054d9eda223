#pragma once

// Parameter space of the 8-ary mixture-of-Gaussians noise modulation and the
// population moment algebra shared by detectors and analytic BEP evaluators.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "mognm/errors.hpp"

namespace mognm {

/// Modulator and channel constants.
///
/// Component variances follow the (off/on, L/H) naming: `sigma2_00` is the
/// small component and `sigma2_10` the large component of the low-variance
/// mixture (b1 = 0); `sigma2_01` / `sigma2_11` are the same for b1 = 1.
struct SchemeParams {
  double mu = 0.1;
  double sigma2_00 = 4e-6;
  double sigma2_10 = 1e-2;
  double sigma2_01 = 1.6e-5;
  double sigma2_11 = 4e-2;
  double p_low = 0.0;
  double p_high = 0.5;
  double sigma2_w = 2.5e-9;
  int n_samples = 60;

  /// sigma2_10 / sigma2_00, the on/off scaling.
  [[nodiscard]] double alpha() const noexcept { return sigma2_10 / sigma2_00; }
  /// sigma2_01 / sigma2_00, the L/H scaling.
  [[nodiscard]] double beta() const noexcept { return sigma2_01 / sigma2_00; }
  [[nodiscard]] double sigma_w() const noexcept { return std::sqrt(sigma2_w); }

  /// Throws InvalidParams when an invariant is violated.
  ///
  /// `p_low == p_high` and `mu == 0` are accepted: both describe degenerate
  /// but analysable constellations (indistinguishable b2, indistinguishable b0).
  void validate() const {
    auto fail = [](const std::string& what) { throw InvalidParams("SchemeParams: " + what); };
    for (double v : {mu, sigma2_00, sigma2_10, sigma2_01, sigma2_11, p_low, p_high, sigma2_w}) {
      if (!std::isfinite(v)) fail("non-finite value");
    }
    if (mu < 0.0) fail("mu must be >= 0");
    if (sigma2_00 <= 0.0) fail("variances must be > 0");
    if (!(sigma2_00 < sigma2_01 && sigma2_01 < sigma2_10 && sigma2_10 < sigma2_11)) {
      fail("require sigma2_00 < sigma2_01 < sigma2_10 < sigma2_11");
    }
    if (p_low < 0.0 || p_low > 1.0 || p_high < 0.0 || p_high > 1.0) fail("probabilities must lie in [0,1]");
    if (p_low > p_high) fail("require p_low <= p_high");
    if (sigma2_w < 0.0) fail("sigma2_w must be >= 0");
    if (n_samples < 4) fail("n_samples must be >= 4");
  }

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

/// One 8-ary symbol: b0 keys the mean, b1 the variance pair, b2 the mixture weight.
struct SymbolBits {
  bool b0 = false;
  bool b1 = false;
  bool b2 = false;

  /// Bijection with 0..7 as b0*4 + b1*2 + b2.
  [[nodiscard]] constexpr int index() const noexcept { return (b0 ? 4 : 0) + (b1 ? 2 : 0) + (b2 ? 1 : 0); }

  [[nodiscard]] static constexpr SymbolBits from_index(int i) {
    if (i < 0 || i > 7) throw InvalidParams("SymbolBits index out of range");
    return {(i & 4) != 0, (i & 2) != 0, (i & 1) != 0};
  }

  friend constexpr bool operator==(const SymbolBits&, const SymbolBits&) = default;
};

/// Effective per-symbol distribution (1-p) N(m, s0) + p N(m, s1).
struct MixtureSpec {
  double m = 0.0;
  double sigma2_0 = 1.0;
  double sigma2_1 = 1.0;
  double p_mix = 0.0;

  friend bool operator==(const MixtureSpec&, const MixtureSpec&) = default;
};

[[nodiscard]] inline MixtureSpec symbol_spec(SymbolBits bits, const SchemeParams& params) {
  return {
      bits.b0 ? params.mu : -params.mu,
      bits.b1 ? params.sigma2_01 : params.sigma2_00,
      bits.b1 ? params.sigma2_11 : params.sigma2_10,
      bits.b2 ? params.p_high : params.p_low,
  };
}

struct PopulationMoments {
  double var_x = 0.0;          // Var(x), transmitted sample
  double e_x2 = 0.0;           // E{x^2}
  double e_x4 = 0.0;           // E{x^4}
  double m_p = 0.0;            // E{r^2}, mean of the sample power
  double sigma2_v = 0.0;       // Var of the sample power
  double sigma2_mhat = 0.0;    // Var of the sample mean
  double mu2_centered = 0.0;   // E{(r-m)^2}
  double mu4_centered = 0.0;   // E{(r-m)^4}
  double kurtosis_pop = 3.0;   // mu4 / mu2^2
  double sigma2_mu2hat = 0.0;  // within-component variance of the 2nd-moment estimator
  double sigma2_mu4hat = 0.0;  // within-component variance of the 4th-moment estimator
};

/// Moments of r = x + w for one symbol, with N samples per frame.
///
/// The sample-moment variances `sigma2_mu2hat` and `sigma2_mu4hat` use the
/// within-component form (2/N) sum w_i s_i^2 and (96/N) sum w_i s_i^4 with
/// noise-inflated component variances s_i = sigma2_i + sigma2_w.
[[nodiscard]] inline PopulationMoments population_moments(const MixtureSpec& spec, double sigma2_w, int n_samples) {
  const double p = spec.p_mix;
  const double q = 1.0 - p;
  const double n = static_cast<double>(n_samples);
  const double m2 = spec.m * spec.m;

  PopulationMoments pm;
  pm.var_x = q * spec.sigma2_0 + p * spec.sigma2_1;
  pm.e_x2 = pm.var_x + m2;
  const double e_y4 = 3.0 * (q * spec.sigma2_0 * spec.sigma2_0 + p * spec.sigma2_1 * spec.sigma2_1);
  pm.e_x4 = e_y4 + 6.0 * pm.var_x * m2 + m2 * m2;
  pm.m_p = pm.e_x2 + sigma2_w;
  const double e_r4 = pm.e_x4 + 6.0 * pm.e_x2 * sigma2_w + 3.0 * sigma2_w * sigma2_w;
  pm.sigma2_v = (e_r4 - pm.m_p * pm.m_p) / n;
  pm.sigma2_mhat = (pm.var_x + sigma2_w) / n;

  const double s0 = spec.sigma2_0 + sigma2_w;
  const double s1 = spec.sigma2_1 + sigma2_w;
  const double sq = q * s0 * s0 + p * s1 * s1;
  pm.mu2_centered = q * s0 + p * s1;
  pm.mu4_centered = 3.0 * sq;
  pm.kurtosis_pop = 3.0 * (sq / (pm.mu2_centered * pm.mu2_centered));
  pm.sigma2_mu2hat = 2.0 / n * sq;
  pm.sigma2_mu4hat = 96.0 / n * (q * s0 * s0 * s0 * s0 + p * s1 * s1 * s1 * s1);
  return pm;
}

/// Precomputed log-density of a two-component zero-skew Gaussian mixture.
///
/// Evaluates log[(1-p) N(r; m, v0) + p N(r; m, v1)] in log-sum-exp form so
/// samples far in either tail never underflow to -inf.
class MixtureLogDensity {
 public:
  MixtureLogDensity(const MixtureSpec& spec, double sigma2_w, bool noise_inflated)
      : m_(spec.m), p_(spec.p_mix) {
    const double v0 = spec.sigma2_0 + (noise_inflated ? sigma2_w : 0.0);
    const double v1 = spec.sigma2_1 + (noise_inflated ? sigma2_w : 0.0);
    constexpr double log_2pi = 1.8378770664093454836;
    inv2v0_ = 0.5 / v0;
    inv2v1_ = 0.5 / v1;
    c0_ = -0.5 * (log_2pi + std::log(v0)) + std::log1p(-p_);
    c1_ = -0.5 * (log_2pi + std::log(v1)) + std::log(p_);
  }

  [[nodiscard]] double operator()(double r) const noexcept {
    const double d2 = (r - m_) * (r - m_);
    if (p_ <= 0.0) return c0_ - d2 * inv2v0_;
    if (p_ >= 1.0) return c1_ - d2 * inv2v1_;
    const double a = c0_ - d2 * inv2v0_;
    const double b = c1_ - d2 * inv2v1_;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
  }

 private:
  double m_;
  double p_;
  double inv2v0_ = 0.0;
  double inv2v1_ = 0.0;
  double c0_ = 0.0;
  double c1_ = 0.0;
};

[[nodiscard]] inline double mixture_log_pdf(double r, const MixtureSpec& spec, double sigma2_w, bool noise_inflated) {
  return MixtureLogDensity(spec, sigma2_w, noise_inflated)(r);
}

[[nodiscard]] inline double mixture_pdf(double r, const MixtureSpec& spec, double sigma2_w, bool noise_inflated) {
  const double v0 = spec.sigma2_0 + (noise_inflated ? sigma2_w : 0.0);
  const double v1 = spec.sigma2_1 + (noise_inflated ? sigma2_w : 0.0);
  const double d2 = (r - spec.m) * (r - spec.m);
  const double k = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const double g0 = k / std::sqrt(v0) * std::exp(-0.5 * d2 / v0);
  const double g1 = k / std::sqrt(v1) * std::exp(-0.5 * d2 / v1);
  return (1.0 - spec.p_mix) * g0 + spec.p_mix * g1;
}

}  // namespace mognm
