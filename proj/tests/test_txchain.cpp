#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "mognm/txchain.hpp"

using namespace mognm;

namespace {

struct Pooled {
  double mean = 0.0, var = 0.0, kurt = 0.0;
};

Pooled pooled_moments(SymbolBits bits, const SchemeParams& p, int frames, std::uint64_t seed) {
  std::vector<double> all;
  all.reserve(static_cast<std::size_t>(frames) * static_cast<std::size_t>(p.n_samples));
  for (int k = 0; k < frames; ++k) {
    const auto f = draw_frame(bits, p, RngHandle{seed, static_cast<std::uint64_t>(k)});
    all.insert(all.end(), f.samples.begin(), f.samples.end());
  }
  Pooled out;
  for (double v : all) out.mean += v;
  out.mean /= static_cast<double>(all.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : all) {
    const double d = (v - out.mean) * (v - out.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(all.size());
  m4 /= static_cast<double>(all.size());
  out.var = m2;
  out.kurt = m4 / (m2 * m2);
  return out;
}

}  // namespace

TEST(DrawFrame, LengthIndexAndDeterminism) {
  SchemeParams p;
  const RngHandle h{11, 3};
  const auto a = draw_frame({true, false, true}, p, h, 5);
  const auto b = draw_frame({true, false, true}, p, h, 5);
  EXPECT_EQ(a.size(), 60u);
  EXPECT_EQ(a.symbol_index, 5u);
  EXPECT_EQ(a, b);
  const auto c = draw_frame({true, false, true}, p, RngHandle{11, 4}, 5);
  EXPECT_NE(a.samples, c.samples);
  for (double v : a.samples) EXPECT_TRUE(std::isfinite(v));
}

TEST(DrawFrame, PureSmallComponentMean) {
  SchemeParams p;
  p.n_samples = 100;
  const auto m = pooled_moments({false, false, false}, p, 1000, 1);  // 1e5 samples
  EXPECT_NEAR(m.mean, -0.1, 5.0 * 2e-3 / std::sqrt(1e5));
  EXPECT_NEAR(m.var, 4e-6, 5.0 * 4e-6 * std::sqrt(2.0 / 1e5));
}

TEST(DrawFrame, MixtureKurtosis) {
  SchemeParams p;
  p.n_samples = 1000;
  const auto m = pooled_moments({false, false, true}, p, 1000, 2);  // 1e6 samples
  EXPECT_NEAR(m.kurt, 5.995, 0.05);
}

TEST(DrawFrame, FullWeightEqualsSwappedVariances) {
  // p_mix = 1 with (s0, s1) has the law of p_mix = 0 with the variances swapped.
  SchemeParams a;
  a.n_samples = 1000;
  a.p_low = 1.0;
  a.p_high = 1.0;
  const auto m = pooled_moments({true, false, false}, a, 500, 3);
  EXPECT_NEAR(m.var, 1e-2, 5.0 * 1e-2 * std::sqrt(2.0 / 5e5));
  EXPECT_NEAR(m.kurt, 3.0, 5.0 * std::sqrt(24.0 / 5e5));
}

TEST(Awgn, ZeroVarianceIsIdentity) {
  SchemeParams p;
  const auto f = draw_frame({false, true, true}, p, RngHandle{1, 1});
  EXPECT_EQ(awgn(f, 0.0, RngHandle{1, 2}), f);
  EXPECT_THROW((void)awgn(f, -1.0, RngHandle{1, 2}), InvalidParams);
}

TEST(Awgn, UnitVarianceOnZeroFrame) {
  SampleFrame zero;
  zero.samples.assign(1'000'000, 0.0);
  const auto r = awgn(zero, 1.0, RngHandle{5, 0});
  double s = 0.0, s2 = 0.0;
  for (double v : r.samples) s += v, s2 += v * v;
  const double n = 1e6;
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0, 0.005);
}

TEST(Awgn, VariancesAdd) {
  SchemeParams p;
  p.n_samples = 1000;
  double acc = 0.0;
  std::size_t n = 0;
  std::vector<double> tx_all, rx_all;
  for (int k = 0; k < 200; ++k) {
    const auto tx = draw_frame({false, true, false}, p, RngHandle{9, static_cast<std::uint64_t>(k)});
    const auto rx = awgn(tx, 1e-5, RngHandle{10, static_cast<std::uint64_t>(k)});
    for (std::size_t i = 0; i < tx.size(); ++i) {
      const double w = rx.samples[i] - tx.samples[i];
      acc += w * w;
      ++n;
    }
  }
  EXPECT_NEAR(acc / static_cast<double>(n), 1e-5, 5.0 * 1e-5 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(PackSymbols, LengthsAndPadding) {
  EXPECT_TRUE(pack_symbols(std::vector<int>{}).empty());
  EXPECT_EQ(pack_symbols(std::vector<int>{1, 0, 1, 0, 1, 1}).size(), 2u);
  const auto s = pack_symbols(std::vector<int>{1, 1, 0, 0, 1, 1, 1});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], (SymbolBits{true, true, false}));
  EXPECT_EQ(s[1], (SymbolBits{false, true, true}));
  EXPECT_EQ(s[2], (SymbolBits{true, false, false}));
}

TEST(ModulateStream, FrameKUsesStreamK) {
  SchemeParams p;
  const std::vector<int> bits{1, 0, 1, 0, 0, 1, 1, 1};
  const RngHandle base{42, 0};
  const auto frames = modulate_stream(bits, p, base);
  ASSERT_EQ(frames.size(), 3u);
  const auto sym = pack_symbols(bits);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    EXPECT_EQ(frames[k], draw_frame(sym[k], p, base.with_stream(k), k));
  }
  EXPECT_TRUE(modulate_stream(std::vector<int>{}, p, base).empty());
}

TEST(ModulateStream, SymbolOrderPermutesFrames) {
  // Frames depend only on (symbol, stream), so reordering the symbols
  // reorders but does not alter the generated set.
  SchemeParams p;
  std::vector<SampleFrame> a, b;
  for (std::uint64_t k = 0; k < 4; ++k) a.push_back(draw_frame(SymbolBits::from_index(static_cast<int>(k)), p, RngHandle{3, k}));
  for (std::uint64_t k = 4; k-- > 0;) b.push_back(draw_frame(SymbolBits::from_index(static_cast<int>(k)), p, RngHandle{3, k}));
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(FrameDump, WritesHeaderAndRows) {
  SchemeParams p;
  p.n_samples = 4;
  const auto tx = draw_frame({true, true, true}, p, RngHandle{1, 0}, 2);
  const auto rx = awgn(tx, p.sigma2_w, RngHandle{1, 1});
  std::ostringstream os;
  write_frames_csv(os, std::vector<SampleFrame>{tx}, std::vector<SampleFrame>{rx});
  std::string line;
  std::istringstream is(os.str());
  std::getline(is, line);
  EXPECT_EQ(line, "symbol_index,t,x,r");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
