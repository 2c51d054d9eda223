#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "mognm/core_model.hpp"

using namespace mognm;

namespace {

double gauss_pdf(double x, double m, double v) {
  return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2.0 * std::numbers::pi * v);
}

// E{(r - c)^k} of the noise-free mixture by quadrature, per component.
double mixture_moment_quad(const MixtureSpec& s, double sigma2_w, int k, double c) {
  double acc = 0.0;
  for (int comp = 0; comp < 2; ++comp) {
    const double w = comp == 0 ? 1.0 - s.p_mix : s.p_mix;
    if (w == 0.0) continue;
    const double v = (comp == 0 ? s.sigma2_0 : s.sigma2_1) + sigma2_w;
    const double sd = std::sqrt(v);
    auto f = [&](double u) {
      const double x = s.m + sd * u;
      return std::pow(x - c, k) * std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    };
    acc += w * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -14.0, 14.0, 15, 1e-13);
  }
  return acc;
}

}  // namespace

TEST(SchemeParams, DefaultsAreValidAndExposeRatios) {
  SchemeParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.alpha(), 1e-2 / 4e-6);
  EXPECT_DOUBLE_EQ(p.beta(), 1.6e-5 / 4e-6);
  EXPECT_DOUBLE_EQ(p.sigma_w(), 5e-5);
}

TEST(SchemeParams, RejectsBrokenInvariants) {
  auto bad = [](auto mutate) {
    SchemeParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), InvalidParams);
  };
  bad([](SchemeParams& p) { p.sigma2_01 = 2e-2; });  // breaks 01 < 10
  bad([](SchemeParams& p) { p.sigma2_00 = 0.0; });
  bad([](SchemeParams& p) { p.p_low = 0.6; });
  bad([](SchemeParams& p) { p.p_high = 1.5; });
  bad([](SchemeParams& p) { p.mu = -1.0; });
  bad([](SchemeParams& p) { p.n_samples = 3; });
  bad([](SchemeParams& p) { p.sigma2_w = -1.0; });
  bad([](SchemeParams& p) { p.mu = std::nan(""); });
}

TEST(SymbolBits, IndexIsABijectionOnEightValues) {
  std::set<int> seen;
  for (int i = 0; i < 8; ++i) {
    const auto b = SymbolBits::from_index(i);
    EXPECT_EQ(b.index(), i);
    EXPECT_EQ(b.index(), (b.b0 ? 4 : 0) + (b.b1 ? 2 : 0) + (b.b2 ? 1 : 0));
    seen.insert(b.index());
  }
  EXPECT_EQ(seen.size(), 8u);
  EXPECT_THROW((void)SymbolBits::from_index(8), InvalidParams);
}

TEST(SymbolSpec, ReferenceMappings) {
  SchemeParams p;
  const auto s000 = symbol_spec({false, false, false}, p);
  EXPECT_EQ(s000, (MixtureSpec{-0.1, 4e-6, 1e-2, 0.0}));
  const auto s111 = symbol_spec({true, true, true}, p);
  EXPECT_EQ(s111, (MixtureSpec{0.1, 1.6e-5, 4e-2, 0.5}));
  const auto s001 = symbol_spec({false, false, true}, p);
  EXPECT_EQ(s001.m, s000.m);
  EXPECT_EQ(s001.sigma2_0, s000.sigma2_0);
  EXPECT_EQ(s001.sigma2_1, s000.sigma2_1);
  EXPECT_EQ(s001.p_mix, 0.5);
}

TEST(PopulationMoments, PowerMeansAtDefaults) {
  SchemeParams p;
  auto v = [&](bool b1, bool b2) { return population_moments(symbol_spec({false, b1, b2}, p), p.sigma2_w, 60).m_p; };
  // V_ij = (1-p) s0 + p s1 + mu^2 + sigma2_w evaluated by hand.
  EXPECT_NEAR(v(false, false), 4e-6 + 0.01 + 2.5e-9, 1e-15);
  EXPECT_NEAR(v(true, true), 0.5 * 1.6e-5 + 0.5 * 4e-2 + 0.01 + 2.5e-9, 1e-15);
  EXPECT_NEAR(v(true, false), 1.6e-5 + 0.01 + 2.5e-9, 1e-15);
  EXPECT_NEAR(v(false, true), 0.5 * 4e-6 + 0.5 * 1e-2 + 0.01 + 2.5e-9, 1e-15);
  // Rounded reference values; V10 is quoted as 0.0100163 against an exact 0.0100160025.
  EXPECT_NEAR(v(false, false), 0.0100040, 1e-7);
  EXPECT_NEAR(v(true, false), 0.0100163, 5e-7);
  EXPECT_NEAR(v(false, true), 0.0150021, 1e-7);
  EXPECT_NEAR(v(true, true), 0.0300080, 1e-7);
  EXPECT_LT(v(false, false), v(true, false));
  EXPECT_LT(v(true, false), v(false, true));
  EXPECT_LT(v(false, true), v(true, true));
}

TEST(PopulationMoments, KurtosisReferenceValue) {
  SchemeParams p;
  const auto pm = population_moments(symbol_spec({false, false, true}, p), p.sigma2_w, 60);
  const double mu2 = 0.5 * (4e-6 + 1e-2) + 2.5e-9;
  const double mu4 = 3.0 * (0.5 * 4e-6 * 4e-6 + 0.5 * 1e-2 * 1e-2);
  EXPECT_NEAR(pm.kurtosis_pop, mu4 / (mu2 * mu2), 2e-3);
  EXPECT_NEAR(pm.kurtosis_pop, 5.995, 5e-3);
}

TEST(PopulationMoments, PureGaussianHasKurtosisExactlyThree) {
  for (double p : {0.0, 1.0}) {
    const auto pm = population_moments({0.3, 2e-3, 7e-2, p}, 1e-4, 30);
    EXPECT_EQ(pm.kurtosis_pop, 3.0);
  }
}

TEST(PopulationMoments, AgreeWithQuadratureOfTheDensity) {
  SchemeParams p;
  p.sigma2_w = 1e-3;  // large enough that every noise term matters
  for (int i = 0; i < 8; ++i) {
    const auto spec = symbol_spec(SymbolBits::from_index(i), p);
    const auto pm = population_moments(spec, p.sigma2_w, 60);
    const double e2 = mixture_moment_quad(spec, p.sigma2_w, 2, 0.0);
    const double e4 = mixture_moment_quad(spec, p.sigma2_w, 4, 0.0);
    const double c2 = mixture_moment_quad(spec, p.sigma2_w, 2, spec.m);
    const double c4 = mixture_moment_quad(spec, p.sigma2_w, 4, spec.m);
    EXPECT_NEAR(pm.m_p, e2, 1e-12 * e2) << i;
    EXPECT_NEAR(pm.sigma2_v, (e4 - e2 * e2) / 60.0, 1e-9 * pm.sigma2_v) << i;
    EXPECT_NEAR(pm.mu2_centered, c2, 1e-12 * c2) << i;
    EXPECT_NEAR(pm.mu4_centered, c4, 1e-10 * c4) << i;
    EXPECT_NEAR(pm.sigma2_mhat, c2 / 60.0, 1e-12 * c2) << i;
    EXPECT_GE(pm.e_x4, pm.e_x2 * pm.e_x2);
    EXPECT_GT(pm.sigma2_v, 0.0);
    EXPECT_GE(pm.kurtosis_pop, 1.0);
  }
}

TEST(PopulationMoments, PowerMeanIncreasesInEachInput) {
  const MixtureSpec base{0.1, 1e-3, 1e-2, 0.3};
  const double w = 1e-4;
  const double m0 = population_moments(base, w, 30).m_p;
  auto up = [&](MixtureSpec s, double ww) { return population_moments(s, ww, 30).m_p; };
  EXPECT_GT(up({base.m, 2e-3, base.sigma2_1, base.p_mix}, w), m0);
  EXPECT_GT(up({base.m, base.sigma2_0, 2e-2, base.p_mix}, w), m0);
  EXPECT_GT(up({base.m, base.sigma2_0, base.sigma2_1, 0.4}, w), m0);
  EXPECT_GT(up({0.2, base.sigma2_0, base.sigma2_1, base.p_mix}, w), m0);
  EXPECT_GT(up(base, 2e-4), m0);
}

TEST(MixturePdf, ReferenceValue) {
  const MixtureSpec s{0.0, 1.0, 4.0, 0.5};
  EXPECT_NEAR(mixture_pdf(0.0, s, 0.0, false), 0.5 * 0.398942 + 0.5 * 0.199471, 1e-6);
  EXPECT_NEAR(mixture_pdf(0.0, s, 0.0, false), 0.299207, 1e-6);
}

TEST(MixturePdf, DegenerateWeightIsSingleGaussian) {
  const MixtureSpec s{0.2, 0.5, 3.0, 0.0};
  for (double r : {-1.0, 0.2, 0.9}) EXPECT_DOUBLE_EQ(mixture_pdf(r, s, 0.0, false), gauss_pdf(r, 0.2, 0.5));
  EXPECT_NEAR(mixture_pdf(0.9, s, 0.1, true), gauss_pdf(0.9, 0.2, 0.6), 1e-15);
}

TEST(MixturePdf, IntegratesToOne) {
  const MixtureSpec s{-0.1, 4e-6, 1e-2, 0.5};
  auto f = [&](double r) { return mixture_pdf(r, s, 2.5e-9, true); };
  const double small = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -0.2, 0.0, 20, 1e-12);
  const double left = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -2.0, -0.2, 20, 1e-12);
  const double right = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2.0, 20, 1e-12);
  EXPECT_NEAR(small + left + right, 1.0, 1e-6);
}

TEST(MixtureLogDensity, MatchesLogOfDensityAndStaysFiniteInTails) {
  const MixtureSpec s{0.1, 1.6e-5, 4e-2, 0.5};
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.2);
  for (int i = 0; i < 2000; ++i) {
    const double r = u(gen);
    const double d = mixture_pdf(r, s, 2.5e-9, true);
    if (d > 1e-300) {
      EXPECT_NEAR(mixture_log_pdf(r, s, 2.5e-9, true), std::log(d), 1e-12 * std::abs(std::log(d)));
    }
  }
  const double far = mixture_log_pdf(50.0, s, 2.5e-9, true);
  EXPECT_TRUE(std::isfinite(far));
  EXPECT_EQ(mixture_pdf(50.0, s, 2.5e-9, true), 0.0);
}
