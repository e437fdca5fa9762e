// Per-user transmit/receive chain: repetition code, user-specific
// interleaver, BPSK mapping, phase scrambling, soft demapping and
// repetition LLR combining.
//
// BPSK convention: bit 0 -> +1, so LLR >= 0 decides bit 0 end-to-end.
// sigma2 always denotes the total complex noise variance E|n|^2
// (sigma2/2 per real dimension).
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pidma/polar_code.hpp"
#include "pidma/types.hpp"

namespace pidma {

// Bijective permutation; interleave scatters v[i] to position perm[i].
class Interleaver {
 public:
  Interleaver() = default;
  explicit Interleaver(std::vector<int> perm);

  static Interleaver identity(int m);
  // Fisher-Yates permutation from a dedicated mt19937_64 stream.
  static Interleaver random(int m, std::uint64_t seed);

  int size() const { return static_cast<int>(perm_.size()); }
  const std::vector<int>& perm() const { return perm_; }

  template <class Derived>
  auto interleave(const Eigen::ArrayBase<Derived>& v) const {
    if (v.size() != size()) throw std::invalid_argument("interleave: length mismatch");
    typename Derived::PlainObject out(v.size());
    for (int i = 0; i < size(); ++i) out[perm_[static_cast<std::size_t>(i)]] = v[i];
    return out;
  }

  template <class Derived>
  auto deinterleave(const Eigen::ArrayBase<Derived>& v) const {
    if (v.size() != size()) throw std::invalid_argument("deinterleave: length mismatch");
    typename Derived::PlainObject out(v.size());
    for (int i = 0; i < size(); ++i) out[i] = v[perm_[static_cast<std::size_t>(i)]];
    return out;
  }

 private:
  std::vector<int> perm_;
};

// Per-user transmit parameters. Power is linear (symbol-energy units),
// phi lies in [0, pi).
struct UserConfig {
  int user_id = 0;
  double power = 1.0;
  double phi = 0.0;
  std::uint64_t interleaver_seed = 0;
  int d_r = 1;
  InformationSet A;
  std::optional<CrcSpec> crc;

  int frame_len() const { return A.N * d_r; }
  double rate_user() const { return rate(A) / d_r; }  // R_u = R_c / d_r
};

// Blockwise repetition: c || c || ... (d_r blocks).
BitVec repeat_encode(const BitVec& c, int d_r);

// Inverse soft operation: sums the d_r copies of each position.
LlrVec repeat_combine(const LlrVec& llrs, int d_r);

// Broadcasts one LLR per code bit to its d_r copies (feedback direction).
LlrVec repeat_duplicate(const LlrVec& llrs, int d_r);

RealVec map_bpsk(const BitVec& bits);

CxVec scramble(const RealVec& s, double phi);
CxVec scramble(const CxVec& s, double phi);
CxVec descramble(const CxVec& y, double phi);

// MMSE estimate of a BPSK symbol given its LLR.
inline double soft_symbol(double llr) { return std::tanh(0.5 * llr); }
RealVec soft_symbols(const LlrVec& llrs);

// L_i = 4 sqrt(P) Re(y_i e^(-j phi)) / sigma_eff2.
LlrVec demap(const CxVec& y, const UserConfig& cfg, double sigma_eff2);
LlrVec demap(const CxVec& y, const UserConfig& cfg, const RealVec& sigma_eff2);

// Full transmit chain: encode -> repeat -> interleave -> BPSK -> scramble.
CxVec transmit_chain(const BitVec& u, const UserConfig& cfg, const Interleaver& pi);

}  // namespace pidma
