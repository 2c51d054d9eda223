#pragma once

// Analytic bit-error-probability evaluators and kurtosis-threshold optimisation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mognm/core_model.hpp"
#include "mognm/errors.hpp"
#include "mognm/optimize.hpp"
#include "mognm/qfunction.hpp"
#include "mognm/rng.hpp"

namespace mognm {

[[nodiscard]] inline double clamp01(double p) noexcept { return std::clamp(p, 0.0, 1.0); }

// ---------------------------------------------------------------------------
// b0: sign of the sample mean
// ---------------------------------------------------------------------------

/// (1/4) sum_ij Q(mu / sigma_mhat|ij) over the four (b1,b2) variance cases.
[[nodiscard]] inline double bep_b0_closed_form(const SchemeParams& params) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    const SymbolBits bits{false, (i & 1) != 0, (i & 2) != 0};
    const auto pm = population_moments(symbol_spec(bits, params), params.sigma2_w, params.n_samples);
    acc += q_exact(params.mu / std::sqrt(pm.sigma2_mhat));
  }
  return clamp01(0.25 * acc);
}

// ---------------------------------------------------------------------------
// b2 by likelihood comparison (BHT)
// ---------------------------------------------------------------------------

namespace detail {

// log of  int_L^inf phi(b; 0, sb^2) exp(-a z^2 - bq z - c) db,  z = (d + b) / sa.
inline double log_tail_gaussian_qapprox(double d, double lower, double sa, double sb) {
  using K = QApproxConstants;
  const double a1 = 0.5 / (sb * sb) + K::a / (sa * sa);
  const double b1 = 2.0 * K::a * d / (sa * sa) + K::b / sa;
  const double c1 = K::a * d * d / (sa * sa) + K::b * d / sa + K::c;
  const double cw = b1 * b1 / (4.0 * a1) - c1;
  const double u = std::sqrt(a1) * (lower + b1 / (2.0 * a1));
  return cw + 0.5 * std::log(std::numbers::pi / a1) - std::log(sb * std::sqrt(2.0 * std::numbers::pi)) +
         std::log(0.5) + log_erfc(u);
}

}  // namespace detail

/// P{A > B + delta} for independent A ~ N(0, sa^2), B ~ N(0, sb^2), with the
/// Q-function inside the outer integral replaced by its exponential fit.
///
/// The integral is split where the Q argument changes sign; the fit is used on
/// the nonnegative half and reflected (Q(-z) = 1 - Q(z)) on the other, each
/// half being a Gaussian integral in closed form after completing the square.
[[nodiscard]] inline double pairwise_exceed_probability(double delta, double sa, double sb) {
  if (sa <= 0.0 && sb <= 0.0) return delta < 0.0 ? 1.0 : (delta > 0.0 ? 0.0 : 0.5);
  if (sa <= 0.0) return q_exact(delta / sb);
  if (sb <= 0.0) return q_approx_reflected(delta / sa);
  const double upper = std::exp(detail::log_tail_gaussian_qapprox(delta, -delta, sa, sb));
  const double lower = std::exp(detail::log_tail_gaussian_qapprox(-delta, delta, sa, sb));
  return clamp01(upper + q_exact(delta / sb) - lower);
}

/// Per-sample moments of the two log-likelihood terms
/// F = log f(r | p_low), G = log f(r | p_high) under one true hypothesis.
struct LoglikTermMoments {
  double mean_f = 0.0;
  double var_f = 0.0;
  double mean_g = 0.0;
  double var_g = 0.0;
  double cov_fg = 0.0;
  double se_mean_f = 0.0;
  double se_mean_g = 0.0;
  double se_delta = 0.0;  // standard error of mean(F - G)

  [[nodiscard]] double delta() const noexcept { return mean_f - mean_g; }
  /// Fit precision is adequate when se(F - G) <= 1% of |mean(F - G)|.
  [[nodiscard]] bool adequate() const noexcept { return se_delta <= 0.01 * std::abs(delta()); }
};

struct BhtGaussianFit {
  bool b0 = false;
  bool b1 = false;
  std::size_t n_mc = 0;
  std::array<LoglikTermMoments, 2> under{};  // index = true b2

  [[nodiscard]] bool adequate() const noexcept { return under[0].adequate() && under[1].adequate(); }
};

inline constexpr std::size_t kMinBhtFitSamples = 100000;

/// Monte Carlo estimate of the per-sample log-likelihood term moments for
/// context (b0, b1). Each hypothesis consumes its own child stream of `rng`.
[[nodiscard]] inline BhtGaussianFit fit_bht_gaussians(const SchemeParams& params, bool b0, bool b1, std::size_t n_mc,
                                                      const RngHandle& rng, bool noise_inflated = true) {
  if (n_mc < kMinBhtFitSamples) throw InvalidParams("fit_bht_gaussians: n_mc must be >= 100000");
  const MixtureLogDensity f_low(symbol_spec({b0, b1, false}, params), params.sigma2_w, noise_inflated);
  const MixtureLogDensity f_high(symbol_spec({b0, b1, true}, params), params.sigma2_w, noise_inflated);
  const double sw = std::sqrt(params.sigma2_w);

  BhtGaussianFit fit{b0, b1, n_mc, {}};
  for (int h = 0; h < 2; ++h) {
    const MixtureSpec spec = symbol_spec({b0, b1, h == 1}, params);
    const double sd0 = std::sqrt(spec.sigma2_0), sd1 = std::sqrt(spec.sigma2_1);
    Engine gen = rng.child(static_cast<std::uint64_t>(h)).engine();
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Welford accumulation of (F, G) and their co-moment.
    double mf = 0.0, mg = 0.0, sff = 0.0, sgg = 0.0, sfg = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
      const bool on = pick(gen) < spec.p_mix;
      const double r = spec.m + (on ? sd1 : sd0) * gauss(gen) + sw * gauss(gen);
      const double f = f_low(r), g = f_high(r);
      const double k = static_cast<double>(i + 1);
      const double df = f - mf, dg = g - mg;
      mf += df / k;
      mg += dg / k;
      sff += df * (f - mf);
      sgg += dg * (g - mg);
      sfg += df * (g - mg);
    }
    const double n = static_cast<double>(n_mc);
    LoglikTermMoments& t = fit.under[static_cast<std::size_t>(h)];
    t.mean_f = mf;
    t.mean_g = mg;
    t.var_f = sff / (n - 1.0);
    t.var_g = sgg / (n - 1.0);
    t.cov_fg = sfg / (n - 1.0);
    t.se_mean_f = std::sqrt(t.var_f / n);
    t.se_mean_g = std::sqrt(t.var_g / n);
    t.se_delta = std::sqrt(std::max(0.0, t.var_f + t.var_g - 2.0 * t.cov_fg) / n);
  }
  return fit;
}

/// Fits for the four (b0,b1) contexts, context k drawing from `rng.child(k)`.
[[nodiscard]] inline std::array<BhtGaussianFit, 4> fit_bht_contexts(const SchemeParams& params, std::size_t n_mc,
                                                                    const RngHandle& rng, bool noise_inflated = true) {
  std::array<BhtGaussianFit, 4> fits;
  for (int k = 0; k < 4; ++k) {
    fits[static_cast<std::size_t>(k)] =
        fit_bht_gaussians(params, (k & 2) != 0, (k & 1) != 0, n_mc, rng.child(100 + static_cast<std::uint64_t>(k)),
                          noise_inflated);
  }
  return fits;
}

/// BHT error probability from Gaussian models of T0 = sum F and T1 = sum G.
///
/// Under each true hypothesis the statistics are taken as independent with
/// mean N*m and variance N*sigma^2 (sum of N iid terms), and the pairwise
/// error P{competing > true} is evaluated by `pairwise_exceed_probability`.
/// Throws InsufficientSamples when a fit is too noisy.
[[nodiscard]] inline double bep_bht(const SchemeParams& params, std::span<const BhtGaussianFit> fits) {
  if (fits.empty()) throw InvalidParams("bep_bht: no fits");
  const double n = static_cast<double>(params.n_samples);
  double acc = 0.0;
  for (const auto& fit : fits) {
    if (!fit.adequate()) {
      std::ostringstream msg;
      msg << "bep_bht: fit for context (b0=" << fit.b0 << ", b1=" << fit.b1 << ") too noisy: se(F-G) = "
          << fit.under[0].se_delta << " / " << fit.under[1].se_delta << " vs |delta| = " << std::abs(fit.under[0].delta())
          << " / " << std::abs(fit.under[1].delta()) << "; increase n_mc";
      throw InsufficientSamples(msg.str());
    }
    const auto& h0 = fit.under[0];
    const auto& h1 = fit.under[1];
    // H0 true: error when T1 > T0.
    const double e0 = pairwise_exceed_probability(n * (h0.mean_f - h0.mean_g), std::sqrt(n * h0.var_g),
                                                  std::sqrt(n * h0.var_f));
    // H1 true: error when T0 > T1.
    const double e1 = pairwise_exceed_probability(n * (h1.mean_g - h1.mean_f), std::sqrt(n * h1.var_f),
                                                  std::sqrt(n * h1.var_g));
    acc += 0.5 * (e0 + e1);
  }
  return clamp01(acc / static_cast<double>(fits.size()));
}

[[nodiscard]] inline double bep_bht(const SchemeParams& params, std::size_t n_mc, const RngHandle& rng,
                                    bool noise_inflated = true) {
  const auto fits = fit_bht_contexts(params, n_mc, rng, noise_inflated);
  return bep_bht(params, fits);
}

// ---------------------------------------------------------------------------
// b2 by kurtosis threshold
// ---------------------------------------------------------------------------

/// How P{sample kurtosis > threshold} is modelled.
enum class KurtosisBepModel {
  /// Exact moments of the Gaussian-sample kurtosis with a Pearson type III
  /// (Anscombe-Glynn) tail, mixed over the binomial count of large-variance
  /// samples in the frame. Assumes sigma2_1 / sigma2_0 >> N.
  pearson_mixture,
  /// mu2_hat, mu4_hat as independent Gaussians, Q replaced by its exponential
  /// fit; the probability is the quadrature of exp(q4(x)).
  gaussian_moment_pair,
};

/// Mean, variance and skewness of K = n sum z^4 / (sum z^2)^2 for n iid
/// N(0, s^2) samples centred at the true mean. K = n sum u_i^4 with u uniform
/// on the unit sphere, which gives the moments in closed form.
struct GaussianKurtosisMoments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
};

[[nodiscard]] inline GaussianKurtosisMoments gaussian_sample_kurtosis_moments(int n_int) {
  const double n = n_int;
  const double d4 = n * (n + 2) * (n + 4) * (n + 6);
  const double d6 = d4 * (n + 8) * (n + 10);
  const double es = 3.0 / (n + 2);
  const double es2 = (105.0 * n + 9.0 * n * (n - 1)) / d4;
  const double es3 = (10395.0 * n + 945.0 * n * (n - 1) + 27.0 * n * (n - 1) * (n - 2)) / d6;
  const double var_s = es2 - es * es;
  const double m3_s = es3 - 3.0 * es * es2 + 2.0 * es * es * es;
  GaussianKurtosisMoments m;
  m.mean = n * es;
  m.variance = n * n * var_s;
  m.skewness = var_s > 0.0 ? m3_s / (var_s * std::sqrt(var_s)) : 0.0;
  return m;
}

/// P{K_n > t} for the known-mean sample kurtosis of n Gaussian samples.
/// Exact for n <= 3 and outside the support [1, n]; Anscombe-Glynn otherwise.
[[nodiscard]] inline double gaussian_sample_kurtosis_sf(int n, double t) {
  if (n < 1) throw InvalidParams("gaussian_sample_kurtosis_sf: n must be >= 1");
  if (t < 1.0) return 1.0;
  if (t >= static_cast<double>(n)) return 0.0;
  if (n == 2) {
    // K = 2 (v^2 + (1-v)^2), v ~ arcsine on [0,1].
    const double c = 0.5 * (1.0 - 0.5 * t);
    const double v1 = 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - 4.0 * c)));
    return clamp01(4.0 / std::numbers::pi * std::asin(std::sqrt(v1)));
  }
  if (n == 3) {
    // u uniform on the sphere: u3 = z ~ U(-1,1), and for fixed z the remaining
    // term depends on s = sin^2(2 phi), arcsine distributed on [0,1].
    auto given_z = [t](double z) {
      const double w = (1.0 - z * z) * (1.0 - z * z);
      if (w <= 0.0) return z * z * z * z * 3.0 > t ? 1.0 : 0.0;
      const double x = 2.0 * (1.0 - (t / 3.0 - z * z * z * z) / w);
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return 2.0 / std::numbers::pi * std::asin(std::sqrt(x));
    };
    return clamp01(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(given_z, 0.0, 1.0, 15, 1e-10));
  }
  const auto m = gaussian_sample_kurtosis_moments(n);
  const double x = (t - m.mean) / std::sqrt(m.variance);
  const double g = m.skewness;
  const double a = 6.0 + 8.0 / g * (2.0 / g + std::sqrt(1.0 + 4.0 / (g * g)));
  const double den = 1.0 + x * std::sqrt(2.0 / (a - 4.0));
  if (den <= 0.0) return 1.0;
  const double z = ((1.0 - 2.0 / (9.0 * a)) - std::cbrt((1.0 - 2.0 / a) / den)) / std::sqrt(2.0 / (9.0 * a));
  return q_exact(z);
}

namespace detail {

inline double binomial_pmf(int n, int k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace detail

/// P{sample kurtosis > t} for a frame of N mixture samples with weight p on
/// the large component. With j large samples the kurtosis is close to
/// (N/j) K_j; with none it is K_N of the small component.
[[nodiscard]] inline double kurtosis_exceed_pearson(int n, double p, double t) {
  double acc = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double w = detail::binomial_pmf(n, j, p);
    if (w == 0.0) continue;
    const double sf = j == 0 ? gaussian_sample_kurtosis_sf(n, t) : gaussian_sample_kurtosis_sf(j, t * j / n);
    acc += w * sf;
  }
  return clamp01(acc);
}

/// Coefficients of q4(x) = E x^4 + F x^2 + G x + H for one hypothesis.
struct KurtosisBepTerms {
  double mu_x = 0.0;  // mean of mu2_hat
  double sigma2_x = 0.0;
  double mu_y = 0.0;  // mean of mu4_hat
  double sigma2_y = 0.0;
  double e = 0.0;
  double f = 0.0;
  double g = 0.0;
  double h = 0.0;

  [[nodiscard]] double q4(double x) const noexcept {
    const double x2 = x * x;
    return e * x2 * x2 + f * x2 + g * x + h;
  }
};

[[nodiscard]] inline KurtosisBepTerms kurtosis_bep_terms(const PopulationMoments& pm, double threshold) {
  using K = QApproxConstants;
  KurtosisBepTerms t;
  t.mu_x = pm.mu2_centered;
  t.sigma2_x = pm.sigma2_mu2hat;
  t.mu_y = pm.mu4_centered;
  t.sigma2_y = pm.sigma2_mu4hat;
  const double sy = std::sqrt(t.sigma2_y);
  const double al = threshold;
  t.e = -K::a * al * al / t.sigma2_y;
  t.f = -0.5 / t.sigma2_x + 2.0 * K::a * al * t.mu_y / t.sigma2_y - K::b * al / sy;
  t.g = t.mu_x / t.sigma2_x;
  t.h = -t.mu_x * t.mu_x / (2.0 * t.sigma2_x) - K::a * t.mu_y * t.mu_y / t.sigma2_y + K::b * t.mu_y / sy - K::c;
  return t;
}

/// int exp(q4(x)) dx / (sigma_x sqrt(2 pi)) over mu_x +- 10 sigma_x, by
/// adaptive Gauss-Kronrod in the standardised variable.
[[nodiscard]] inline double kurtosis_exceed_moment_pair(const KurtosisBepTerms& t, double rel_tol = 1e-8) {
  const double sx = std::sqrt(t.sigma2_x);
  auto integrand = [&](double u) { return std::exp(t.q4(t.mu_x + sx * u)); };
  double err = 0.0, l1 = 0.0;
  const double val =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -10.0, 10.0, 20, rel_tol, &err, &l1);
  if (!std::isfinite(val) || err > rel_tol * std::max(l1, 1e-300) + 1e-300) {
    throw QuadratureError("kurtosis BEP quadrature did not converge (error estimate " + std::to_string(err) + ")");
  }
  return val / std::sqrt(2.0 * std::numbers::pi);
}

/// P{b2_hat != b2} for the kurtosis detector at threshold `threshold`,
/// averaged over the four (b0,b1) contexts with equiprobable b2.
[[nodiscard]] inline double bep_kurtosis(const SchemeParams& params, double threshold,
                                         KurtosisBepModel model = KurtosisBepModel::pearson_mixture,
                                         double rel_tol = 1e-8) {
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    const bool b0 = (k & 2) != 0, b1 = (k & 1) != 0;
    std::array<double, 2> exceed{};
    for (int h = 0; h < 2; ++h) {
      const MixtureSpec spec = symbol_spec({b0, b1, h == 1}, params);
      if (model == KurtosisBepModel::pearson_mixture) {
        exceed[static_cast<std::size_t>(h)] = kurtosis_exceed_pearson(params.n_samples, spec.p_mix, threshold);
      } else {
        const auto pm = population_moments(spec, params.sigma2_w, params.n_samples);
        exceed[static_cast<std::size_t>(h)] = kurtosis_exceed_moment_pair(kurtosis_bep_terms(pm, threshold), rel_tol);
      }
    }
    acc += 0.5 * exceed[0] + 0.5 * (1.0 - exceed[1]);
  }
  return clamp01(acc / 4.0);
}

struct ThresholdSearch {
  double lo = 2.5;
  double hi = 6.0;
  double grid_step = 0.05;
  double tol = 1e-4;
};

/// argmin of bep_kurtosis: grid scan, then golden-section refinement inside
/// the neighbouring grid cells of the best grid point.
[[nodiscard]] inline double optimal_kurtosis_threshold(const SchemeParams& params,
                                                       KurtosisBepModel model = KurtosisBepModel::pearson_mixture,
                                                       const ThresholdSearch& search = {}) {
  auto bep = [&](double th) { return bep_kurtosis(params, th, model); };
  const int steps = static_cast<int>(std::lround((search.hi - search.lo) / search.grid_step));
  double best = search.lo;
  double best_val = bep(best);
  for (int i = 1; i <= steps; ++i) {
    const double th = search.lo + i * search.grid_step;
    const double v = bep(th);
    if (v < best_val) best = th, best_val = v;
  }
  const double lo = std::max(search.lo, best - search.grid_step);
  const double hi = std::min(search.hi, best + search.grid_step);
  const double refined = golden_section_minimize(bep, lo, hi, search.tol);
  return bep(refined) <= best_val ? refined : best;
}

}  // namespace mognm
