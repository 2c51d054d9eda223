#include <gtest/gtest.h>

#include <string>

#include "mognm/config.hpp"

using namespace mognm;

TEST(Config, EmptyDocumentGivesReferenceDefaults) {
  const auto c = parse_config_text("{}");
  EXPECT_EQ(c.experiment.scheme, SchemeParams{});
  EXPECT_EQ(c.experiment.detector, DetectorConfig{});
  EXPECT_EQ(c.experiment.n_symbols, 20000);
  EXPECT_EQ(c.experiment.n_runs, 20);
  EXPECT_DOUBLE_EQ(c.experiment.scheme.sigma2_w, 2.5e-9);
}

TEST(Config, ReadsEverySection) {
  const auto c = parse_config_text(R"({
    "scheme": {"mu": 0.02, "sigma_w": 1e-4, "n_samples": 30, "p_high": 0.4},
    "detector": {"th_kurtosis": 3.4, "th_jb": 5, "b2_method": "bht", "centering": "sample_mean",
                 "ml_uses_noise_inflation": false},
    "experiment": {"id": "fig3", "n_symbols": 5000, "n_runs": 3, "master_seed": 18446744073709551615,
                   "sweep_axis": "th_k", "sweep_grid": [3, 4], "workers": 2},
    "analysis": {"overlay_bht": false, "bht_fit_samples": 300000, "kurtosis_model": "moment_pair"},
    "output": {"path": "out.csv", "verbosity": "quiet"}
  })");
  const auto& x = c.experiment;
  EXPECT_DOUBLE_EQ(x.scheme.mu, 0.02);
  EXPECT_DOUBLE_EQ(x.scheme.sigma2_w, 1e-8);
  EXPECT_EQ(x.scheme.n_samples, 30);
  EXPECT_DOUBLE_EQ(x.scheme.p_high, 0.4);
  EXPECT_EQ(x.detector.b2_method, B2Method::bht);
  EXPECT_EQ(x.detector.centering, Centering::sample_mean);
  EXPECT_FALSE(x.detector.ml_uses_noise_inflation);
  EXPECT_EQ(x.experiment_id, "fig3");
  EXPECT_EQ(x.master_seed, 18446744073709551615ULL);
  EXPECT_EQ(x.sweep_axis, SweepAxis::th_k);
  EXPECT_EQ(x.sweep_grid, (std::vector<double>{3, 4}));
  EXPECT_EQ(x.workers, 2);
  EXPECT_FALSE(x.overlays.bht);
  EXPECT_EQ(x.overlays.bht_fit_samples, 300000u);
  EXPECT_EQ(x.overlays.kurtosis_model, KurtosisBepModel::gaussian_moment_pair);
  EXPECT_EQ(c.output.path, "out.csv");
  EXPECT_EQ(c.output.verbosity, "quiet");
}

TEST(Config, UnknownKeysAreNamed) {
  try {
    (void)parse_config_text(R"({"scheme": {"mu": 0.1, "muu": 2}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("scheme.muu"), std::string::npos);
  }
  EXPECT_THROW((void)parse_config_text(R"({"extra": {}})"), ConfigError);
}

TEST(Config, TypeAndValueErrors) {
  EXPECT_THROW((void)parse_config_text(R"({"scheme": {"mu": "big"}})"), ConfigError);
  EXPECT_THROW((void)parse_config_text(R"({"scheme": {"n_samples": 6.5}})"), ConfigError);
  EXPECT_THROW((void)parse_config_text(R"({"experiment": {"master_seed": -1}})"), ConfigError);
  EXPECT_THROW((void)parse_config_text(R"({"detector": {"b2_method": "ml"}})"), ConfigError);
  EXPECT_THROW((void)parse_config_text(R"({"experiment": {"sweep_axis": "mu"}})"), ConfigError);
  EXPECT_THROW((void)parse_config_text("{not json"), ConfigError);
  EXPECT_THROW((void)parse_config_text(R"({"scheme": {"sigma_w": -1}})"), ConfigError);
}

TEST(Config, RoundTripIsExact) {
  const auto c = parse_config_text(R"({
    "scheme": {"mu": 0.0123456789, "sigma_w": 3.3e-5, "sigma2_11": 0.0412345},
    "experiment": {"sweep_axis": "sigma_w", "sweep_grid": [1e-6, 3.1622776601683795e-5, 1e-3], "master_seed": 7}
  })");
  const auto again = parse_config_text(dump_config(c));
  EXPECT_EQ(again, c);
  EXPECT_EQ(dump_config(again), dump_config(c));
}

TEST(Config, DottedOverrides) {
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "scheme.mu=0.02");
  apply_override(j, "detector.b2_method=jb");
  apply_override(j, "experiment.sweep_grid=[1,2]");
  const auto c = config_from_json(j);
  EXPECT_DOUBLE_EQ(c.experiment.scheme.mu, 0.02);
  EXPECT_EQ(c.experiment.detector.b2_method, B2Method::jb);
  EXPECT_EQ(c.experiment.sweep_grid, (std::vector<double>{1, 2}));
  EXPECT_THROW(apply_override(j, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(j, "scheme..mu=1"), ConfigError);
}
