// Iterative multi-user receiver: parallel soft interference cancellation,
// per-user demap -> deinterleave -> repetition combine -> BP decode, feedback
// remap, repeated for n_it_mud outer iterations.
#pragma once

#include <vector>

#include "pidma/bp_decoder.hpp"
#include "pidma/gmac_channel.hpp"
#include "pidma/user_chain.hpp"

namespace pidma {

enum class FeedbackMode { Extrinsic, App };

struct ReceiverConfig {
  int n_it_mud = 10;
  int n_it_bp = 2;                 // BP iterations per outer iteration
  bool reset_fg = false;           // fresh factor graph every outer iteration
  StopRule stop_rule = StopRule::GMatrix;
  DecoderConfig bp;                // q, schedule_seed, llr_max taken from here
  FeedbackMode feedback = FeedbackMode::Extrinsic;
  bool variance_per_position = true;  // false: frame-averaged residual variance
};

// Per-user receiver memory across outer iterations.
struct UserState {
  UserConfig cfg;
  Interleaver pi;
  FactorGraphState fg;
  bool fg_valid = false;
  CxVec tx_soft;       // scrambled, power-weighted soft symbols sqrt(P) e^(j phi) tanh(l/2)
  RealVec soft_abs;    // tanh(l/2) per transmitted position
  bool stopped = false;
  DecodeResult result;
};

UserState make_user_state(const UserConfig& cfg, int frame_len);

// Saturated feedback from known transmitted frame bits (genie side-information
// or a converged hard decision).
void set_genie_feedback(UserState& state, const BitVec& tx_bits);

// y_j = y - sum_{i != j} sqrt(P_i) e^(j phi_i) tanh(l_i/2), per position.
CxVec cancel(const ReceivedFrame& frame, const std::vector<UserState>& states, int j);

// sigma_eff2 = sigma2 + sum_{i != j} P_i (1 - tanh^2(l_i/2)); per-position,
// or the frame average of the same quantity when per_position is false.
RealVec effective_variance(const std::vector<UserState>& states, int j, double sigma2,
                           bool per_position, int frame_len);

// Runs the full SoIC loop and returns one DecodeResult per user. genie_u
// supplies the true information bits and is required for StopRule::Genie.
std::vector<DecodeResult> receive(const ReceivedFrame& frame,
                                  const std::vector<UserConfig>& users,
                                  const ReceiverConfig& cfg,
                                  const std::vector<BitVec>* genie_u = nullptr);

}  // namespace pidma
