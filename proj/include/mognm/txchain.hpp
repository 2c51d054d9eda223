#pragma once

// Transmitter and channel: mixture-noise frames per symbol, bitstream
// framing, and additive white Gaussian receiver noise.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdint>
#include <ostream>
#include <random>
#include <ranges>
#include <span>
#include <vector>

#include "mognm/core_model.hpp"
#include "mognm/rng.hpp"

namespace mognm {

struct SampleFrame {
  std::vector<double> samples;
  std::size_t symbol_index = 0;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  friend bool operator==(const SampleFrame&, const SampleFrame&) = default;
};

/// Draws N iid samples m + (Bernoulli(p) ? N(0, s1) : N(0, s0)).
///
/// The component selector is drawn for every sample, including p = 0 and
/// p = 1, so that a stream is consumed identically for all symbols.
template <class URBG>
[[nodiscard]] SampleFrame draw_frame(SymbolBits bits, const SchemeParams& params, URBG& gen,
                                     std::size_t symbol_index = 0) {
  const MixtureSpec spec = symbol_spec(bits, params);
  const double sd0 = std::sqrt(spec.sigma2_0);
  const double sd1 = std::sqrt(spec.sigma2_1);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SampleFrame frame;
  frame.symbol_index = symbol_index;
  frame.samples.resize(static_cast<std::size_t>(params.n_samples));
  for (double& x : frame.samples) {
    const bool on = pick(gen) < spec.p_mix;
    x = spec.m + (on ? sd1 : sd0) * gauss(gen);
  }
  return frame;
}

[[nodiscard]] inline SampleFrame draw_frame(SymbolBits bits, const SchemeParams& params, const RngHandle& rng,
                                            std::size_t symbol_index = 0) {
  Engine gen = rng.engine();
  return draw_frame(bits, params, gen, symbol_index);
}

/// r = x + w with w iid N(0, sigma2_w). A zero variance returns the input unchanged.
template <class URBG>
[[nodiscard]] SampleFrame awgn(const SampleFrame& frame, double sigma2_w, URBG& gen) {
  if (sigma2_w < 0.0) throw InvalidParams("awgn: sigma2_w must be >= 0");
  SampleFrame out = frame;
  if (sigma2_w == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2_w));
  for (double& r : out.samples) r += gauss(gen);
  return out;
}

[[nodiscard]] inline SampleFrame awgn(const SampleFrame& frame, double sigma2_w, const RngHandle& rng) {
  Engine gen = rng.engine();
  return awgn(frame, sigma2_w, gen);
}

/// Packs a bitstream into symbols, zero-padding the last partial triplet.
/// Any nonzero element counts as a one.
template <std::ranges::input_range R>
[[nodiscard]] std::vector<SymbolBits> pack_symbols(const R& bitstream) {
  std::vector<SymbolBits> out;
  std::array<bool, 3> acc{};
  std::size_t k = 0;
  for (const auto& b : bitstream) {
    acc[k++] = static_cast<bool>(b);
    if (k == 3) {
      out.push_back({acc[0], acc[1], acc[2]});
      acc = {};
      k = 0;
    }
  }
  if (k != 0) out.push_back({acc[0], acc[1], acc[2]});
  return out;
}

/// Modulates a bitstream; frame k is drawn from stream `base.with_stream(k)`.
template <std::ranges::input_range R>
[[nodiscard]] std::vector<SampleFrame> modulate_stream(const R& bitstream, const SchemeParams& params,
                                                       const RngHandle& base) {
  const auto symbols = pack_symbols(bitstream);
  std::vector<SampleFrame> frames;
  frames.reserve(symbols.size());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    frames.push_back(draw_frame(symbols[k], params, base.with_stream(k), k));
  }
  return frames;
}

/// Debug dump with columns symbol_index,t,x,r. `tx` and `rx` must be aligned.
inline void write_frames_csv(std::ostream& os, std::span<const SampleFrame> tx, std::span<const SampleFrame> rx) {
  if (tx.size() != rx.size()) throw InvalidParams("write_frames_csv: tx/rx frame counts differ");
  os << "symbol_index,t,x,r\n";
  char buf[96];
  for (std::size_t k = 0; k < tx.size(); ++k) {
    if (tx[k].size() != rx[k].size()) throw InvalidParams("write_frames_csv: frame length mismatch");
    for (std::size_t t = 0; t < tx[k].size(); ++t) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", tx[k].symbol_index, t + 1, tx[k].samples[t],
                    rx[k].samples[t]);
      os << buf;
    }
  }
}

}  // namespace mognm
