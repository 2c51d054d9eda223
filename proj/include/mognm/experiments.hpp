#pragma once

// Seeded, parallel Monte Carlo harness: per-point BEP estimation, parameter
// sweeps with analytic overlays, and the CSV report format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mognm/analytic.hpp"
#include "mognm/core_model.hpp"
#include "mognm/errors.hpp"
#include "mognm/rng.hpp"
#include "mognm/rxchain.hpp"
#include "mognm/txchain.hpp"

namespace mognm {

enum class SweepAxis { none, th_k, th_jb, n_samples, sigma_w };

[[nodiscard]] inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::none: return "none";
    case SweepAxis::th_k: return "th_k";
    case SweepAxis::th_jb: return "th_jb";
    case SweepAxis::n_samples: return "n_samples";
    case SweepAxis::sigma_w: return "sigma_w";
  }
  return "none";
}

[[nodiscard]] inline SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "none") return SweepAxis::none;
  if (s == "th_k") return SweepAxis::th_k;
  if (s == "th_jb") return SweepAxis::th_jb;
  if (s == "n_samples") return SweepAxis::n_samples;
  if (s == "sigma_w") return SweepAxis::sigma_w;
  throw ConfigError("unknown sweep axis '" + std::string(s) + "' (expected none|th_k|th_jb|n_samples|sigma_w)");
}

[[nodiscard]] inline std::string_view to_string(KurtosisBepModel m) {
  return m == KurtosisBepModel::pearson_mixture ? "pearson_mixture" : "moment_pair";
}

[[nodiscard]] inline KurtosisBepModel parse_kurtosis_model(std::string_view s) {
  if (s == "pearson_mixture") return KurtosisBepModel::pearson_mixture;
  if (s == "moment_pair") return KurtosisBepModel::gaussian_moment_pair;
  throw ConfigError("unknown kurtosis model '" + std::string(s) + "' (expected pearson_mixture|moment_pair)");
}

/// Which analytic curves accompany simulated points.
struct OverlayOptions {
  bool b0 = true;
  bool kurtosis = true;  // only for b2_method = kurtosis
  bool bht = true;       // only for b2_method = bht
  std::size_t bht_fit_samples = 200000;
  KurtosisBepModel kurtosis_model = KurtosisBepModel::pearson_mixture;

  friend bool operator==(const OverlayOptions&, const OverlayOptions&) = default;
};

struct ExperimentConfig {
  std::string experiment_id = "default";
  SchemeParams scheme;
  DetectorConfig detector;
  int n_symbols = 20000;
  int n_runs = 20;
  std::uint64_t master_seed = 1;
  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_grid;
  int workers = 1;
  OverlayOptions overlays;

  void validate() const {
    scheme.validate();
    detector.validate();
    if (n_symbols < 1) throw InvalidParams("n_symbols must be >= 1");
    if (n_runs < 1) throw InvalidParams("n_runs must be >= 1");
    if (workers < 1) throw InvalidParams("workers must be >= 1");
    if (sweep_axis != SweepAxis::none && sweep_grid.empty()) throw InvalidParams("sweep_grid is empty");
    if (overlays.bht_fit_samples < kMinBhtFitSamples) throw InvalidParams("bht_fit_samples must be >= 100000");
  }

  /// Warnings that do not stop a run.
  [[nodiscard]] std::vector<std::string> warnings() const {
    auto w = detector.warnings();
    if (n_symbols < 1000) w.emplace_back("n_symbols < 1000: standard errors are unreliable");
    return w;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// The configuration with the sweep axis set to `value`.
[[nodiscard]] inline ExperimentConfig at_grid_value(ExperimentConfig config, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::none: break;
    case SweepAxis::th_k: config.detector.th_kurtosis = value; break;
    case SweepAxis::th_jb: config.detector.th_jb = value; break;
    case SweepAxis::n_samples: {
      const double r = std::round(value);
      if (r != value) throw InvalidParams("n_samples grid values must be integers");
      config.scheme.n_samples = static_cast<int>(r);
      break;
    }
    case SweepAxis::sigma_w:
      if (value < 0.0) throw InvalidParams("sigma_w grid values must be >= 0");
      config.scheme.sigma2_w = value * value;
      break;
  }
  config.sweep_axis = SweepAxis::none;
  config.sweep_grid.clear();
  return config;
}

// ---------------------------------------------------------------------------
// Trials and counts
// ---------------------------------------------------------------------------

struct TrialOutcome {
  bool degenerate = false;
  std::array<bool, 3> error{};  // b0, b1, b2
};

struct ErrorCounts {
  std::uint64_t trials = 0;
  std::uint64_t degenerate = 0;
  std::array<std::uint64_t, 3> errors{};

  [[nodiscard]] std::uint64_t valid() const noexcept { return trials - degenerate; }

  void add(const TrialOutcome& t) noexcept {
    ++trials;
    if (t.degenerate) {
      ++degenerate;
      return;
    }
    for (std::size_t i = 0; i < 3; ++i) errors[i] += t.error[i] ? 1 : 0;
  }

  ErrorCounts& operator+=(const ErrorCounts& o) noexcept {
    trials += o.trials;
    degenerate += o.degenerate;
    for (std::size_t i = 0; i < 3; ++i) errors[i] += o.errors[i];
    return *this;
  }

  friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

struct BepEstimate {
  double p = 0.0;
  double se = 0.0;
  std::uint64_t errors = 0;
};

/// errors / n and the binomial standard error sqrt(p(1-p)/n).
[[nodiscard]] inline BepEstimate estimate(std::uint64_t errors, std::uint64_t n) noexcept {
  BepEstimate e;
  e.errors = errors;
  if (n == 0) return e;
  e.p = static_cast<double>(errors) / static_cast<double>(n);
  e.se = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(n));
  return e;
}

/// Stream of trial (run, symbol). Children 0, 1, 2 feed the information
/// bits, the transmitted samples and the channel noise.
[[nodiscard]] inline RngHandle trial_stream(std::uint64_t master_seed, int run, int symbol) noexcept {
  return {master_seed, (static_cast<std::uint64_t>(run) << 32) | static_cast<std::uint32_t>(symbol)};
}

struct TrialFrame {
  SymbolBits sent;
  SampleFrame received;
};

[[nodiscard]] inline TrialFrame generate_trial(const SchemeParams& params, std::uint64_t master_seed, int run,
                                               int symbol) {
  const RngHandle h = trial_stream(master_seed, run, symbol);
  Engine bit_gen = h.child(0).engine();
  std::bernoulli_distribution coin(0.5);
  const SymbolBits sent{coin(bit_gen), coin(bit_gen), coin(bit_gen)};
  const SampleFrame tx = draw_frame(sent, params, h.child(1), static_cast<std::size_t>(symbol));
  return {sent, awgn(tx, params.sigma2_w, h.child(2))};
}

[[nodiscard]] inline TrialOutcome compare_bits(SymbolBits sent, SymbolBits got) noexcept {
  return {false, {sent.b0 != got.b0, sent.b1 != got.b1, sent.b2 != got.b2}};
}

/// The full transmit, channel and receive pipeline for one trial.
struct PipelineTrial {
  TrialOutcome operator()(const ExperimentConfig& config, int run, int symbol) const {
    const TrialFrame t = generate_trial(config.scheme, config.master_seed, run, symbol);
    try {
      return compare_bits(t.sent, demodulate_frame(t.received, config.scheme, config.detector).bits);
    } catch (const DegenerateFrame&) {
      return {true, {}};
    }
  }
};

namespace detail {

inline int effective_workers(int requested, std::uint64_t total) {
  const auto cap = static_cast<std::uint64_t>(std::max(1, requested));
  return static_cast<int>(std::max<std::uint64_t>(1, std::min(cap, total)));
}

/// Calls body(begin, end, slot) on contiguous slices of [0, total) across
/// `workers` threads. Each slot owns its accumulator, so results merged in
/// slot order are independent of scheduling.
template <class Body>
void parallel_slices(std::uint64_t total, int workers, Body&& body) {
  const int w = effective_workers(workers, total);
  if (w == 1) {
    body(std::uint64_t{0}, total, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  const std::uint64_t chunk = (total + static_cast<std::uint64_t>(w) - 1) / static_cast<std::uint64_t>(w);
  for (int s = 0; s < w; ++s) {
    const std::uint64_t begin = std::min(total, chunk * static_cast<std::uint64_t>(s));
    const std::uint64_t end = std::min(total, begin + chunk);
    pool.emplace_back([&, begin, end, s] {
      try {
        body(begin, end, s);
      } catch (...) {
        errors[static_cast<std::size_t>(s)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// Error counts of `trial(config, run, symbol)` over all runs and symbols.
template <class Trial>
[[nodiscard]] ErrorCounts simulate_counts(const ExperimentConfig& config, Trial&& trial) {
  const auto k = static_cast<std::uint64_t>(config.n_symbols);
  const std::uint64_t total = k * static_cast<std::uint64_t>(config.n_runs);
  std::vector<ErrorCounts> slots(static_cast<std::size_t>(detail::effective_workers(config.workers, total)));
  detail::parallel_slices(total, config.workers, [&](std::uint64_t begin, std::uint64_t end, int slot) {
    ErrorCounts& acc = slots[static_cast<std::size_t>(slot)];
    for (std::uint64_t i = begin; i < end; ++i) {
      acc.add(trial(config, static_cast<int>(i / k), static_cast<int>(i % k)));
    }
  });
  ErrorCounts total_counts;
  for (const auto& s : slots) total_counts += s;
  return total_counts;
}

/// Counts for several detector settings evaluated on the same received
/// frames. Each frame is demodulated once with `config.detector`; the other
/// settings only re-threshold the stored statistics, so they may differ from
/// it in th_kurtosis, th_jb and b2_method only.
[[nodiscard]] inline std::vector<ErrorCounts> simulate_detector_variants(const ExperimentConfig& config,
                                                                         const std::vector<DetectorConfig>& variants) {
  for (const auto& v : variants) {
    if (v.ml_uses_noise_inflation != config.detector.ml_uses_noise_inflation ||
        v.centering != config.detector.centering) {
      throw InvalidParams("detector variants may differ only in thresholds and b2 method");
    }
  }
  const auto k = static_cast<std::uint64_t>(config.n_symbols);
  const std::uint64_t total = k * static_cast<std::uint64_t>(config.n_runs);
  const int w = detail::effective_workers(config.workers, total);
  std::vector<std::vector<ErrorCounts>> slots(static_cast<std::size_t>(w),
                                              std::vector<ErrorCounts>(variants.size()));
  detail::parallel_slices(total, config.workers, [&](std::uint64_t begin, std::uint64_t end, int slot) {
    auto& acc = slots[static_cast<std::size_t>(slot)];
    for (std::uint64_t i = begin; i < end; ++i) {
      const TrialFrame t =
          generate_trial(config.scheme, config.master_seed, static_cast<int>(i / k), static_cast<int>(i % k));
      std::optional<Decision> d;
      try {
        d = demodulate_frame(t.received, config.scheme, config.detector);
      } catch (const DegenerateFrame&) {
      }
      for (std::size_t v = 0; v < variants.size(); ++v) {
        acc[v].add(d ? compare_bits(t.sent, redecide(*d, variants[v])) : TrialOutcome{true, {}});
      }
    }
  });
  std::vector<ErrorCounts> out(variants.size());
  for (const auto& s : slots) {
    for (std::size_t v = 0; v < variants.size(); ++v) out[v] += s[v];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct AnalyticOverlay {
  std::optional<double> p_b0;
  std::optional<double> p_b2_kurtosis;
  std::optional<double> p_b2_bht;
};

struct BepRow {
  std::string axis_name = "none";
  double axis_value = 0.0;
  ExperimentConfig point;  // configuration at this grid value
  ErrorCounts counts;
  std::array<BepEstimate, 3> bep{};
  AnalyticOverlay analytic;
};

struct BepReport {
  std::string experiment_id;
  std::uint64_t master_seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<BepRow> rows;
};

namespace detail {

inline std::string fmt_g(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string scheme_key(const SchemeParams& s) {
  std::string k;
  for (double v : {s.mu, s.sigma2_00, s.sigma2_10, s.sigma2_01, s.sigma2_11, s.p_low, s.p_high, s.sigma2_w}) {
    k += fmt_g(v) + ';';
  }
  return k + std::to_string(s.n_samples);
}

}  // namespace detail

/// Hash of every field that influences simulated or analytic results.
/// The worker count is excluded.
[[nodiscard]] inline std::uint64_t config_hash(const ExperimentConfig& c) {
  std::string k = c.experiment_id + '|' + detail::scheme_key(c.scheme) + '|';
  k += detail::fmt_g(c.detector.th_kurtosis) + ';' + detail::fmt_g(c.detector.th_jb) + ';';
  k += std::string(to_string(c.detector.b2_method)) + ';' + (c.detector.ml_uses_noise_inflation ? "1" : "0") + ';';
  k += std::string(to_string(c.detector.centering)) + '|';
  k += std::to_string(c.n_symbols) + ';' + std::to_string(c.n_runs) + ';' + std::to_string(c.master_seed) + '|';
  k += std::string(to_string(c.sweep_axis)) + ':';
  for (double g : c.sweep_grid) k += detail::fmt_g(g) + ',';
  k += '|' + std::to_string(c.overlays.b0) + std::to_string(c.overlays.kurtosis) + std::to_string(c.overlays.bht) +
       ';' + std::to_string(c.overlays.bht_fit_samples) + ';' + std::string(to_string(c.overlays.kurtosis_model));
  return detail::fnv1a(k);
}

/// Memoised analytic overlays keyed by the inputs each curve depends on.
/// Thread-safe.
class OverlayCache {
 public:
  [[nodiscard]] AnalyticOverlay get(const ExperimentConfig& point) {
    AnalyticOverlay out;
    const auto& o = point.overlays;
    const std::string base = detail::scheme_key(point.scheme);
    if (o.b0) {
      out.p_b0 = lookup("b0|" + base, [&] { return std::optional(bep_b0_closed_form(point.scheme)); });
    }
    if (o.kurtosis && point.detector.b2_method == B2Method::kurtosis) {
      const std::string key =
          "kur|" + base + '|' + detail::fmt_g(point.detector.th_kurtosis) + '|' + std::string(to_string(o.kurtosis_model));
      out.p_b2_kurtosis = lookup(key, [&] {
        return std::optional(bep_kurtosis(point.scheme, point.detector.th_kurtosis, o.kurtosis_model));
      });
    }
    if (o.bht && point.detector.b2_method == B2Method::bht) {
      const std::string key = "bht|" + base + '|' + std::to_string(o.bht_fit_samples) + '|' +
                              std::to_string(point.master_seed) + '|' +
                              (point.detector.ml_uses_noise_inflation ? "1" : "0");
      out.p_b2_bht = lookup(key, [&]() -> std::optional<double> {
        try {
          return bep_bht(point.scheme, o.bht_fit_samples, RngHandle{point.master_seed, 0xB47ULL},
                         point.detector.ml_uses_noise_inflation);
        } catch (const InsufficientSamples&) {
          return std::nullopt;
        }
      });
    }
    return out;
  }

  [[nodiscard]] std::size_t size() const {
    std::scoped_lock lock(mutex_);
    return values_.size();
  }

 private:
  template <class F>
  std::optional<double> lookup(const std::string& key, F&& compute) {
    const std::uint64_t h = detail::fnv1a(key);
    {
      std::scoped_lock lock(mutex_);
      if (auto it = values_.find(h); it != values_.end()) return it->second;
    }
    const std::optional<double> v = compute();
    std::scoped_lock lock(mutex_);
    values_.emplace(h, v);
    return v;
  }

  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::optional<double>> values_;
};

namespace detail {

inline BepRow make_row(const ExperimentConfig& point, SweepAxis axis, double value, const ErrorCounts& counts,
                       OverlayCache& cache) {
  BepRow row;
  row.axis_name = std::string(to_string(axis));
  row.axis_value = value;
  row.point = point;
  row.counts = counts;
  for (std::size_t i = 0; i < 3; ++i) row.bep[i] = estimate(counts.errors[i], counts.valid());
  row.analytic = cache.get(point);
  return row;
}

}  // namespace detail

/// One simulated point with a custom trial function.
template <class Trial>
[[nodiscard]] BepRow run_point(const ExperimentConfig& config, Trial&& trial, OverlayCache& cache) {
  config.validate();
  return detail::make_row(config, SweepAxis::none, 0.0, simulate_counts(config, std::forward<Trial>(trial)), cache);
}

[[nodiscard]] inline BepRow run_point(const ExperimentConfig& config) {
  OverlayCache cache;
  return run_point(config, PipelineTrial{}, cache);
}

/// All grid points of `config.sweep_axis`, in grid order. Threshold axes
/// reuse one set of demodulated frames for the whole grid.
[[nodiscard]] inline BepReport run_sweep(const ExperimentConfig& config, OverlayCache& cache) {
  config.validate();
  BepReport report;
  report.experiment_id = config.experiment_id;
  report.master_seed = config.master_seed;
  report.config_hash = config_hash(config);

  const SweepAxis axis = config.sweep_axis;
  if (axis == SweepAxis::none) {
    report.rows.push_back(run_point(config, PipelineTrial{}, cache));
    return report;
  }
  if (axis == SweepAxis::th_k || axis == SweepAxis::th_jb) {
    std::vector<ExperimentConfig> points;
    std::vector<DetectorConfig> variants;
    for (double v : config.sweep_grid) {
      points.push_back(at_grid_value(config, axis, v));
      points.back().validate();
      variants.push_back(points.back().detector);
    }
    const auto counts = simulate_detector_variants(at_grid_value(config, SweepAxis::none, 0.0), variants);
    for (std::size_t i = 0; i < points.size(); ++i) {
      report.rows.push_back(detail::make_row(points[i], axis, config.sweep_grid[i], counts[i], cache));
    }
    return report;
  }
  for (double v : config.sweep_grid) {
    const ExperimentConfig point = at_grid_value(config, axis, v);
    point.validate();
    report.rows.push_back(detail::make_row(point, axis, v, simulate_counts(point, PipelineTrial{}), cache));
  }
  return report;
}

[[nodiscard]] inline BepReport run_sweep(const ExperimentConfig& config) {
  OverlayCache cache;
  return run_sweep(config, cache);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "experiment_id,axis_name,axis_value,N,sigma_w,th_k,th_jb,b2_method,K,n_runs,master_seed,"
    "p_b0_sim,se_b0,p_b1_sim,se_b1,p_b2_sim,se_b2,p_b0_analytic,p_b2_kur_analytic,p_b2_bht_analytic,"
    "degenerate_frames";

[[nodiscard]] inline std::string csv_row(const std::string& experiment_id, const BepRow& row) {
  using detail::fmt_g;
  auto opt = [](const std::optional<double>& v) { return v ? fmt_g(*v, 12) : std::string(); };
  const auto& p = row.point;
  std::string s;
  s += experiment_id + ',' + row.axis_name + ',' + fmt_g(row.axis_value, 12) + ',';
  s += std::to_string(p.scheme.n_samples) + ',' + fmt_g(p.scheme.sigma_w(), 12) + ',';
  s += fmt_g(p.detector.th_kurtosis, 12) + ',' + fmt_g(p.detector.th_jb, 12) + ',';
  s += std::string(to_string(p.detector.b2_method)) + ',';
  s += std::to_string(p.n_symbols) + ',' + std::to_string(p.n_runs) + ',' + std::to_string(p.master_seed) + ',';
  for (const auto& e : row.bep) s += fmt_g(e.p, 12) + ',' + fmt_g(e.se, 12) + ',';
  s += opt(row.analytic.p_b0) + ',' + opt(row.analytic.p_b2_kurtosis) + ',' + opt(row.analytic.p_b2_bht) + ',';
  s += std::to_string(row.counts.degenerate);
  return s;
}

/// Writes `# `-prefixed comment lines, the header and one row per point.
inline void write_csv(std::ostream& os, const BepReport& report, const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) {
    std::size_t start = 0;
    while (start <= c.size()) {
      const std::size_t nl = c.find('\n', start);
      os << "# " << c.substr(start, nl == std::string::npos ? std::string::npos : nl - start) << '\n';
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
  }
  os << kCsvHeader << '\n';
  for (const auto& row : report.rows) os << csv_row(report.experiment_id, row) << '\n';
}

/// Inclusive arithmetic grid lo, lo+step, ..., hi (hi kept when within step/1e6).
[[nodiscard]] inline std::vector<double> arithmetic_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw InvalidParams("grid: need step > 0 and hi >= lo");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-6));
  std::vector<double> g;
  for (long i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  // Snap representation noise: 2.5 + 3*0.1 prints as 2.8, not 2.8000000000000003.
  for (double& v : g) v = std::stod(detail::fmt_g(v, 12));
  return g;
}

/// n points log-spaced between lo and hi inclusive.
[[nodiscard]] inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw InvalidParams("log grid: need 0 < lo <= hi, n >= 1");
  std::vector<double> g;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    g.push_back(lo * std::pow(hi / lo, t));
  }
  return g;
}

/// Default grid of an axis.
[[nodiscard]] inline std::vector<double> default_grid(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return {};
    case SweepAxis::th_k: return arithmetic_grid(2.5, 5.0, 0.1);
    case SweepAxis::th_jb: return arithmetic_grid(0.0, 20.0, 1.0);
    case SweepAxis::n_samples: return {15, 30, 60};
    case SweepAxis::sigma_w: return log_grid(1e-6, 1e-3, 7);
  }
  return {};
}

}  // namespace mognm
