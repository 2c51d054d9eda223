// Modulates a short bitstream, passes it through the channel and decodes it.

#include <cstdio>
#include <vector>

#include "mognm/mognm.hpp"

int main() {
  mognm::SchemeParams params;
  mognm::DetectorConfig detector;
  detector.b2_method = mognm::B2Method::bht;

  const std::vector<int> bits{1, 0, 1, 1, 1, 0, 0, 0, 1, 0, 1, 0};
  const mognm::RngHandle tx_stream{2024, 0};
  const auto frames = mognm::modulate_stream(bits, params, tx_stream);

  std::vector<int> decoded;
  for (const auto& frame : frames) {
    const auto rx = mognm::awgn(frame, params.sigma2_w, tx_stream.child(frame.symbol_index + 1000));
    const auto d = mognm::demodulate_frame(rx, params, detector);
    std::printf("symbol %zu: kurtosis %.2f  BHT loglik %.1f / %.1f\n", frame.symbol_index, d.stats.kurtosis_hat,
                d.bht_loglik[0], d.bht_loglik[1]);
    decoded.insert(decoded.end(), {d.bits.b0, d.bits.b1, d.bits.b2});
  }

  int errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) errors += (bits[i] != 0) != (decoded[i] != 0);
  std::printf("%d bit errors in %zu bits\n", errors, bits.size());
}
