#include "pidma/user_chain.hpp"

#include <cmath>
#include <complex>

#include "pidma/rng.hpp"

namespace pidma {

Interleaver::Interleaver(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<bool> seen(perm_.size(), false);
  for (int p : perm_) {
    if (p < 0 || p >= static_cast<int>(perm_.size()) || seen[static_cast<std::size_t>(p)])
      throw std::invalid_argument("Interleaver: not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }
}

Interleaver Interleaver::identity(int m) {
  std::vector<int> p(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) p[static_cast<std::size_t>(i)] = i;
  return Interleaver(std::move(p));
}

Interleaver Interleaver::random(int m, std::uint64_t seed) {
  Rng rng(seed);
  return Interleaver(rng.permutation(m));
}

BitVec repeat_encode(const BitVec& c, int d_r) {
  if (d_r < 1) throw std::invalid_argument("repeat_encode: d_r must be >= 1");
  BitVec out(c.size() * d_r);
  for (int b = 0; b < d_r; ++b) out.segment(b * c.size(), c.size()) = c;
  return out;
}

LlrVec repeat_combine(const LlrVec& llrs, int d_r) {
  if (d_r < 1) throw std::invalid_argument("repeat_combine: d_r must be >= 1");
  if (llrs.size() % d_r != 0)
    throw std::invalid_argument("repeat_combine: length not divisible by d_r");
  const Eigen::Index N = llrs.size() / d_r;
  LlrVec out = LlrVec::Zero(N);
  for (int b = 0; b < d_r; ++b) out += llrs.segment(b * N, N);
  return out;
}

LlrVec repeat_duplicate(const LlrVec& llrs, int d_r) {
  if (d_r < 1) throw std::invalid_argument("repeat_duplicate: d_r must be >= 1");
  LlrVec out(llrs.size() * d_r);
  for (int b = 0; b < d_r; ++b) out.segment(b * llrs.size(), llrs.size()) = llrs;
  return out;
}

RealVec map_bpsk(const BitVec& bits) {
  RealVec s(bits.size());
  for (Eigen::Index i = 0; i < bits.size(); ++i) s[i] = bits[i] ? -1.0 : 1.0;
  return s;
}

CxVec scramble(const RealVec& s, double phi) {
  const std::complex<double> rot = std::polar(1.0, phi);
  return s.cast<std::complex<double>>() * rot;
}

CxVec scramble(const CxVec& s, double phi) {
  return s * std::polar(1.0, phi);
}

CxVec descramble(const CxVec& y, double phi) {
  return y * std::polar(1.0, -phi);
}

RealVec soft_symbols(const LlrVec& llrs) {
  return (0.5 * llrs).tanh();
}

LlrVec demap(const CxVec& y, const UserConfig& cfg, double sigma_eff2) {
  if (!(sigma_eff2 > 0.0)) throw std::invalid_argument("demap: sigma_eff2 must be positive");
  const double scale = 4.0 * std::sqrt(cfg.power);
  return scale * descramble(y, cfg.phi).real() / sigma_eff2;
}

LlrVec demap(const CxVec& y, const UserConfig& cfg, const RealVec& sigma_eff2) {
  if (y.size() != sigma_eff2.size()) throw std::invalid_argument("demap: length mismatch");
  if ((sigma_eff2 <= 0.0).any())
    throw std::invalid_argument("demap: sigma_eff2 must be positive");
  const double scale = 4.0 * std::sqrt(cfg.power);
  return scale * descramble(y, cfg.phi).real() / sigma_eff2;
}

CxVec transmit_chain(const BitVec& u, const UserConfig& cfg, const Interleaver& pi) {
  const BitVec x = encode(u, cfg.A);
  const BitVec rep = repeat_encode(x, cfg.d_r);
  const BitVec inter = pi.interleave(rep);
  return scramble(map_bpsk(inter), cfg.phi);
}

}  // namespace pidma
