#include <gtest/gtest.h>

#include <cstdio>

#include "mognm/experiments.hpp"

using namespace mognm;

// The Gaussian model of the BHT statistics should land within a factor of
// two of the simulated BHT error rate at the reference parameters.
TEST(BhtAnalytic, WithinFactorTwoOfSimulation) {
  ExperimentConfig c;
  c.n_symbols = 20000;
  c.n_runs = 20;
  c.master_seed = 2024;
  c.detector.b2_method = B2Method::bht;
  c.overlays.bht = false;
  const auto row = run_point(c);
  const double sim = row.bep[2].p;
  const double analytic = bep_bht(c.scheme, 4 * kMinBhtFitSamples, RngHandle{c.master_seed, 0xB47ULL});
  std::printf("BHT analytic %.4e  simulated %.4e (%llu errors in %llu symbols)\n", analytic, sim,
              static_cast<unsigned long long>(row.counts.errors[2]), static_cast<unsigned long long>(row.counts.valid()));
  EXPECT_LE(analytic, 2.0 * sim);
  EXPECT_GE(analytic, 0.5 * sim);
}
