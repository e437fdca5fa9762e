// Iterative BP decoding on the polar factor graph.
//
// The graph has n+1 columns of N edges each. Row 0 is the u-side (code
// structure / frozen priors), row n carries the channel LLRs. Stage s
// (1-based, s = 1 leftmost) sits between rows s-1 and s and pairs indices
// (i, i + 2^(s-1)) in its N/2 processing elements. L(r,:) holds the
// left-going message at column r, R(r,:) the right-going one.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pidma/polar_code.hpp"
#include "pidma/types.hpp"

namespace pidma {

inline constexpr double kDefaultLlrMax = 100.0;

// f(x,y) = log((1 + e^(x+y)) / (e^x + e^y)) evaluated in the overflow-free
// form sign(x)sign(y) min(|x|,|y|) + log1p(e^-|x+y|) - log1p(e^-|x-y|).
inline double boxplus(double x, double y) {
  const double s = std::copysign(1.0, x) * std::copysign(1.0, y);
  const double m = std::min(std::abs(x), std::abs(y));
  return s * m + std::log1p(std::exp(-std::abs(x + y))) -
         std::log1p(std::exp(-std::abs(x - y)));
}

inline double clamp_llr(double v, double llr_max) {
  return std::clamp(v, -llr_max, llr_max);
}

struct PeOutputs {
  double L_out1, L_out2, R_out1, R_out2;
};

// The four message updates of one processing element, each clamped.
// Port 1 is the XOR branch of the kernel (v1, v2) -> (v1^v2, v2).
inline PeOutputs pe_update(double L_in1, double L_in2, double R_in1, double R_in2,
                           double llr_max = kDefaultLlrMax) {
  PeOutputs o;
  o.R_out1 = clamp_llr(boxplus(R_in1, L_in2 + R_in2), llr_max);
  o.R_out2 = clamp_llr(boxplus(R_in1, L_in1) + R_in2, llr_max);
  o.L_out1 = clamp_llr(boxplus(L_in1, L_in2 + R_in2), llr_max);
  o.L_out2 = clamp_llr(boxplus(R_in1, L_in1) + L_in2, llr_max);
  return o;
}

// L/R message matrices of one factor-graph instance ("internal memory").
struct FactorGraphState {
  LlrMat L;  // (n+1) x N
  LlrMat R;  // (n+1) x N
  InformationSet A;
  double llr_max = kDefaultLlrMax;

  int N() const { return A.N; }
  int n() const { return A.n; }
};

enum class StopRule { GMatrix, Crc, Genie, None };

struct StopCriterion {
  StopRule rule = StopRule::None;
  std::optional<CrcSpec> crc;  // Crc
  BitVec u_true;               // Genie

  static StopCriterion gmatrix() { return {StopRule::GMatrix, {}, {}}; }
  static StopCriterion with_crc(const CrcSpec& spec) { return {StopRule::Crc, spec, {}}; }
  static StopCriterion genie(BitVec u) { return {StopRule::Genie, {}, std::move(u)}; }
  static StopCriterion none() { return {}; }
};

struct DecoderConfig {
  int max_iters_per_graph = 60;   // I
  int num_graphs = 1;             // q; graph 1 uses the identity schedule
  std::uint64_t schedule_seed = 0;
  StopCriterion stop = StopCriterion::gmatrix();
  double llr_max = kDefaultLlrMax;
  std::ostream* trace = nullptr;  // per-iteration CSV: graph,iter,stopped,u_hat
};

struct DecodeResult {
  BitVec u_hat;        // length k
  BitVec x_hat;        // length N
  bool stopped_early = false;
  int graphs_used = 0;
  int iters_used = 0;
  LlrVec ext_out;      // R(n,:) - the code-constraint message toward the channel
};

// Fresh state: channel LLRs into row n, frozen priors (+llr_max) into row 0.
FactorGraphState initialize(const LlrVec& L_ch, const InformationSet& A,
                            double llr_max = kDefaultLlrMax);

std::vector<int> identity_schedule(int n);
// Fisher-Yates permutation of stages {1..n}.
std::vector<int> permuted_schedule(int n, std::uint64_t seed);

// One full sweep: L-pass visiting schedule back-to-front (right-to-left for
// the identity), then R-pass visiting it front-to-back.
void one_iteration(FactorGraphState& state, const std::vector<int>& schedule);

// bit = 0 iff LLR >= 0.
BitVec llr2bit(const LlrVec& v);

BitVec hard_info_bits(const FactorGraphState& state);   // u-side decision, info positions
BitVec hard_code_bits(const FactorGraphState& state);   // channel-side decision

bool check_stop(const FactorGraphState& state, const StopCriterion& criterion);

// Multi-trellis BP: up to q freshly initialized graphs, each run for at most
// I iterations with a stop check after every iteration.
DecodeResult decode(const LlrVec& L_ch, const InformationSet& A, const DecoderConfig& cfg);
// Same, but also hands back the final graph state (for turbo feedback).
DecodeResult decode(const LlrVec& L_ch, const InformationSet& A, const DecoderConfig& cfg,
                    FactorGraphState& final_state);

// Persistent-memory decoding: overwrite only the channel row with new LLRs,
// keep all other messages, run `iters` identity-schedule iterations with the
// given stop criterion. Calling initialize() instead is the reset variant.
DecodeResult decode_warm(FactorGraphState& state, const LlrVec& L_ch_new, int iters,
                         const StopCriterion& stop = StopCriterion::none());

}  // namespace pidma
