// Analytic error probabilities and the optimal kurtosis threshold versus N.

#include <cstdio>

#include "mognm/mognm.hpp"

int main() {
  for (int n : {15, 30, 60}) {
    mognm::SchemeParams p;
    p.n_samples = n;
    const double th = mognm::optimal_kurtosis_threshold(p);
    std::printf("N=%2d  p_b0 %.3e  optimal Th_k %.3f  p_b2(kurtosis) %.4f  p_b2(BHT) %.3e\n", n,
                mognm::bep_b0_closed_form(p), th, mognm::bep_kurtosis(p, th),
                mognm::bep_bht(p, mognm::kMinBhtFitSamples, mognm::RngHandle{1, 1}));
  }
}
