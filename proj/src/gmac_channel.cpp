#include "pidma/gmac_channel.hpp"

#include <cmath>
#include <stdexcept>

#include "pidma/rng.hpp"

namespace pidma {

ReceivedFrame transmit(const std::vector<CxVec>& x_tilde, const std::vector<double>& powers,
                       const ChannelConfig& cfg) {
  if (x_tilde.empty() || x_tilde.size() != powers.size())
    throw std::invalid_argument("transmit: need one power per user signal");
  if (cfg.sigma2 < 0.0) throw std::invalid_argument("transmit: sigma2 must be >= 0");
  const Eigen::Index len = x_tilde.front().size();
  for (const CxVec& x : x_tilde)
    if (x.size() != len) throw std::invalid_argument("transmit: unequal frame lengths");
  for (double p : powers)
    if (!(p > 0.0)) throw std::invalid_argument("transmit: powers must be positive");

  ReceivedFrame frame;
  frame.sigma2 = cfg.sigma2;
  frame.y = CxVec::Zero(len);
  for (std::size_t i = 0; i < x_tilde.size(); ++i)
    frame.y += std::sqrt(powers[i]) * x_tilde[i];

  Rng rng(cfg.seed);
  const double s = std::sqrt(cfg.sigma2 / 2.0);
  for (Eigen::Index t = 0; t < len; ++t) {
    const double re = rng.gaussian();
    const double im = rng.gaussian();
    frame.y[t] += std::complex<double>(s * re, s * im);
  }
  return frame;
}

double sigma2_from_ebn0(double ebn0_db, double rate_user, double power) {
  if (!(rate_user > 0.0)) throw std::invalid_argument("sigma2_from_ebn0: rate must be positive");
  if (!(power > 0.0)) throw std::invalid_argument("sigma2_from_ebn0: power must be positive");
  const double eb = power / rate_user;
  return eb / std::pow(10.0, ebn0_db / 10.0);
}

}  // namespace pidma
