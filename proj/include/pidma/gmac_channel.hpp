// Gaussian multiple access channel: y = sum_i sqrt(P_i) x~_i + n with
// circularly symmetric complex AWGN of total variance sigma2.
#pragma once

#include <cstdint>
#include <vector>

#include "pidma/types.hpp"

namespace pidma {

struct ChannelConfig {
  int K_a = 1;
  double sigma2 = 1.0;  // E|n|^2; sigma2/2 per real dimension
  std::uint64_t seed = 0;
};

struct ReceivedFrame {
  CxVec y;
  double sigma2 = 0.0;  // true noise variance, handed to the receiver
};

// Superposition plus noise; deterministic given cfg.seed. sigma2 == 0 is the
// noiseless switch (the noise stream is still drawn so streams stay aligned).
ReceivedFrame transmit(const std::vector<CxVec>& x_tilde, const std::vector<double>& powers,
                       const ChannelConfig& cfg);

// Per-user Eb/N0 convention: one complex symbol per coded bit, E_b = P / R_u,
// sigma2 = N0 = E_b / 10^(ebn0_db/10).
double sigma2_from_ebn0(double ebn0_db, double rate_user, double power);

}  // namespace pidma
