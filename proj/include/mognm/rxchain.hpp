#pragma once

// Receiver: frame statistics, the five detectors and the composite pipeline
// b0 (mean sign) -> b1 (ML over four mixtures) -> b2 (kurtosis | JB | BHT).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "mognm/core_model.hpp"
#include "mognm/errors.hpp"
#include "mognm/txchain.hpp"

namespace mognm {

struct FrameStats {
  double m_hat = 0.0;         // (1/N) sum r
  double p_hat = 0.0;         // (1/N) sum r^2
  double center = 0.0;        // centre used for the central moments
  double mu2_hat = 0.0;       // (1/N) sum (r - c)^k, k = 2, 3, 4
  double mu3_hat = 0.0;
  double mu4_hat = 0.0;
  double kurtosis_hat = 0.0;  // mu4 / mu2^2
  double skewness_hat = 0.0;  // mu3 / mu2^1.5
  double jb_hat = 0.0;        // (N/6) (S^2 + (K-3)^2 / 4)
  int n = 0;
};

/// Sample statistics of a frame about `center` (biased 1/N normalisation).
///
/// Throws DegenerateFrame when every sample is identical or the spread about
/// the centre vanishes to machine precision.
[[nodiscard]] inline FrameStats frame_stats(std::span<const double> r, double center) {
  if (r.size() < 4) throw InvalidParams("frame_stats: need at least 4 samples");
  const double n = static_cast<double>(r.size());
  double s1 = 0.0, s2 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double lo = r.front(), hi = r.front(), scale = std::abs(center);
  for (double v : r) {
    if (!std::isfinite(v)) throw InvalidParams("frame_stats: non-finite sample");
    s1 += v;
    s2 += v * v;
    const double d = v - center;
    const double d2 = d * d;
    c2 += d2;
    c3 += d2 * d;
    c4 += d2 * d2;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    scale = std::max(scale, std::abs(v));
  }
  FrameStats st;
  st.n = static_cast<int>(r.size());
  st.center = center;
  st.m_hat = s1 / n;
  st.p_hat = s2 / n;
  st.mu2_hat = c2 / n;
  st.mu3_hat = c3 / n;
  st.mu4_hat = c4 / n;
  const double tiny = std::numeric_limits<double>::epsilon() * scale;
  if (lo == hi || st.mu2_hat <= tiny * tiny) throw DegenerateFrame("frame_stats: zero spread about the centre");
  st.kurtosis_hat = st.mu4_hat / (st.mu2_hat * st.mu2_hat);
  st.skewness_hat = st.mu3_hat / (st.mu2_hat * std::sqrt(st.mu2_hat));
  const double ek = st.kurtosis_hat - 3.0;
  st.jb_hat = n / 6.0 * (st.skewness_hat * st.skewness_hat + 0.25 * ek * ek);
  return st;
}

[[nodiscard]] inline FrameStats frame_stats(const SampleFrame& frame, double center) {
  return frame_stats(std::span<const double>(frame.samples), center);
}

enum class B2Method { kurtosis, jb, bht };
enum class Centering { nominal_mean, sample_mean };

[[nodiscard]] inline std::string_view to_string(B2Method m) {
  switch (m) {
    case B2Method::kurtosis: return "kurtosis";
    case B2Method::jb: return "jb";
    case B2Method::bht: return "bht";
  }
  return "?";
}

[[nodiscard]] inline B2Method parse_b2_method(std::string_view s) {
  if (s == "kurtosis") return B2Method::kurtosis;
  if (s == "jb") return B2Method::jb;
  if (s == "bht") return B2Method::bht;
  throw ConfigError("unknown b2_method '" + std::string(s) + "' (expected kurtosis|jb|bht)");
}

[[nodiscard]] inline std::string_view to_string(Centering c) {
  return c == Centering::nominal_mean ? "nominal_mean" : "sample_mean";
}

[[nodiscard]] inline Centering parse_centering(std::string_view s) {
  if (s == "nominal_mean") return Centering::nominal_mean;
  if (s == "sample_mean") return Centering::sample_mean;
  throw ConfigError("unknown centering '" + std::string(s) + "' (expected nominal_mean|sample_mean)");
}

struct DetectorConfig {
  double th_kurtosis = 3.6;
  double th_jb = 2.0;
  B2Method b2_method = B2Method::kurtosis;
  bool ml_uses_noise_inflation = true;
  Centering centering = Centering::nominal_mean;

  void validate() const {
    if (!(th_kurtosis > 0.0) || !std::isfinite(th_kurtosis)) throw InvalidParams("DetectorConfig: th_kurtosis must be > 0");
    if (!std::isfinite(th_jb)) throw InvalidParams("DetectorConfig: th_jb must be finite");
  }

  /// Non-fatal configuration issues.
  [[nodiscard]] std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (th_jb < 0.0) w.emplace_back("th_jb < 0: the JB statistic is nonnegative, b2 will always decide 1");
    if (th_kurtosis <= 3.0) w.emplace_back("th_kurtosis <= 3: below the Gaussian kurtosis");
    return w;
  }

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

/// Sign rule on the sample mean. m_hat == 0 resolves to 1.
[[nodiscard]] inline bool detect_b0(const FrameStats& stats) noexcept { return !(stats.m_hat < 0.0); }

/// Power thresholds (V00+V01)/2, (V10+V01)/2, (V10+V11)/2, V_ij indexed by (b1,b2).
[[nodiscard]] inline std::array<double, 3> simple_power_thresholds(const SchemeParams& params) {
  auto v = [&](bool b1, bool b2) {
    return population_moments(symbol_spec({false, b1, b2}, params), params.sigma2_w, params.n_samples).m_p;
  };
  const double v00 = v(false, false), v10 = v(true, false), v01 = v(false, true), v11 = v(true, true);
  return {(v00 + v01) / 2.0, (v10 + v01) / 2.0, (v10 + v11) / 2.0};
}

/// Throws InvalidThresholds unless the three power thresholds are strictly increasing.
inline void check_simple_thresholds(const SchemeParams& params) {
  const auto th = simple_power_thresholds(params);
  if (!(th[0] < th[1] && th[1] < th[2])) throw InvalidThresholds("simple detector: power thresholds not increasing");
}

struct SimpleDetection {
  bool b1 = false;
  bool b2 = false;
  std::array<double, 3> thresholds{};
  bool ordered = true;  // false when thresholds had to be sorted
};

/// Sample-power detector for (b1,b2). Regions, in ascending power:
/// 00 | 10 | 01 | 11. Thresholds are sorted so the map stays total when the
/// nominal ordering fails; `ordered` reports that case.
[[nodiscard]] inline SimpleDetection detect_b1b2_simple(const FrameStats& stats, const SchemeParams& params) {
  SimpleDetection d;
  d.thresholds = simple_power_thresholds(params);
  d.ordered = d.thresholds[0] < d.thresholds[1] && d.thresholds[1] < d.thresholds[2];
  auto th = d.thresholds;
  std::sort(th.begin(), th.end());
  const double p = stats.p_hat;
  if (p <= th[0]) {
    d.b1 = false, d.b2 = false;
  } else if (p <= th[1]) {
    d.b1 = true, d.b2 = false;
  } else if (p < th[2]) {
    d.b1 = false, d.b2 = true;
  } else {
    d.b1 = true, d.b2 = true;
  }
  return d;
}

/// (b1,b2) of ML hypothesis h, in the order 00, 10, 01, 11.
[[nodiscard]] constexpr std::pair<bool, bool> ml_hypothesis_bits(int h) noexcept { return {(h & 1) != 0, (h & 2) != 0}; }

/// First index of the maximum; ties go to the smaller index.
template <std::size_t K>
[[nodiscard]] int argmax_first(const std::array<double, K>& v) noexcept {
  int best = 0;
  for (int i = 1; i < static_cast<int>(K); ++i) {
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

[[nodiscard]] inline double frame_loglik(std::span<const double> r, const MixtureLogDensity& f) {
  double acc = 0.0;
  for (double v : r) acc += f(v);
  return acc;
}

struct MlDetection {
  bool b1 = false;
  bool b2 = false;
  std::array<double, 4> loglik{};
};

/// ML over the four (b1,b2) mixtures with the mean fixed by b0_hat.
[[nodiscard]] inline MlDetection detect_b1b2_ml(const SampleFrame& frame, bool b0_hat, const SchemeParams& params,
                                                const DetectorConfig& config) {
  MlDetection d;
  for (int h = 0; h < 4; ++h) {
    const auto [b1, b2] = ml_hypothesis_bits(h);
    const MixtureLogDensity f(symbol_spec({b0_hat, b1, b2}, params), params.sigma2_w, config.ml_uses_noise_inflation);
    d.loglik[static_cast<std::size_t>(h)] = frame_loglik(frame.samples, f);
  }
  std::tie(d.b1, d.b2) = ml_hypothesis_bits(argmax_first(d.loglik));
  return d;
}

[[nodiscard]] inline bool detect_b2_kurtosis(const FrameStats& stats, const DetectorConfig& config) noexcept {
  return stats.kurtosis_hat > config.th_kurtosis;
}

[[nodiscard]] inline bool detect_b2_jb(const FrameStats& stats, const DetectorConfig& config) noexcept {
  return stats.jb_hat > config.th_jb;
}

struct BhtDetection {
  bool b2 = false;
  std::array<double, 2> loglik{};  // T0 (p_low), T1 (p_high)
};

/// Likelihood comparison of the p_low and p_high mixtures with (b0,b1) fixed.
/// Decides 0 when T0 >= T1.
[[nodiscard]] inline BhtDetection detect_b2_bht(const SampleFrame& frame, bool b0_hat, bool b1_hat,
                                                const SchemeParams& params, const DetectorConfig& config) {
  BhtDetection d;
  for (int h = 0; h < 2; ++h) {
    const MixtureLogDensity f(symbol_spec({b0_hat, b1_hat, h == 1}, params), params.sigma2_w,
                              config.ml_uses_noise_inflation);
    d.loglik[static_cast<std::size_t>(h)] = frame_loglik(frame.samples, f);
  }
  d.b2 = !(d.loglik[0] >= d.loglik[1]);
  return d;
}

struct Decision {
  SymbolBits bits;
  std::array<double, 4> ml_loglik{};
  std::array<double, 2> bht_loglik{};
  FrameStats stats;
};

[[nodiscard]] inline bool decide_b2(const FrameStats& stats, const std::array<double, 2>& bht_loglik,
                                    const DetectorConfig& config) noexcept {
  switch (config.b2_method) {
    case B2Method::kurtosis: return detect_b2_kurtosis(stats, config);
    case B2Method::jb: return detect_b2_jb(stats, config);
    case B2Method::bht: return !(bht_loglik[0] >= bht_loglik[1]);
  }
  return false;
}

/// Full receiver. Moment statistics are centred at the nominal mean selected
/// by b0_hat unless the config asks for the sample mean.
[[nodiscard]] inline Decision demodulate_frame(const SampleFrame& frame, const SchemeParams& params,
                                               const DetectorConfig& config) {
  double sum = 0.0;
  for (double v : frame.samples) sum += v;
  const double mean = sum / static_cast<double>(frame.size());
  const bool b0 = !(mean < 0.0);
  const double center = config.centering == Centering::nominal_mean ? (b0 ? params.mu : -params.mu) : mean;

  Decision d;
  d.stats = frame_stats(frame, center);
  const MlDetection ml = detect_b1b2_ml(frame, b0, params, config);
  d.ml_loglik = ml.loglik;
  d.bht_loglik = detect_b2_bht(frame, b0, ml.b1, params, config).loglik;
  d.bits = {b0, ml.b1, decide_b2(d.stats, d.bht_loglik, config)};
  return d;
}

/// Re-derives the bits of a stored decision from its statistics.
[[nodiscard]] inline SymbolBits redecide(const Decision& d, const DetectorConfig& config) noexcept {
  const auto [b1, b2ml] = ml_hypothesis_bits(argmax_first(d.ml_loglik));
  (void)b2ml;
  return {detect_b0(d.stats), b1, decide_b2(d.stats, d.bht_loglik, config)};
}

}  // namespace mognm
