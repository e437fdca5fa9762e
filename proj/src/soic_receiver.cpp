#include "pidma/soic_receiver.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace pidma {

UserState make_user_state(const UserConfig& cfg, int frame_len) {
  if (cfg.frame_len() != frame_len)
    throw std::invalid_argument("make_user_state: user frame length mismatch");
  UserState st;
  st.cfg = cfg;
  st.pi = Interleaver::random(frame_len, cfg.interleaver_seed);
  st.tx_soft = CxVec::Zero(frame_len);
  st.soft_abs = RealVec::Zero(frame_len);
  return st;
}

void set_genie_feedback(UserState& state, const BitVec& tx_bits) {
  if (tx_bits.size() != state.tx_soft.size())
    throw std::invalid_argument("set_genie_feedback: length mismatch");
  state.soft_abs = map_bpsk(tx_bits);
  const std::complex<double> w = std::sqrt(state.cfg.power) * std::polar(1.0, state.cfg.phi);
  state.tx_soft = w * state.soft_abs.cast<std::complex<double>>();
}

CxVec cancel(const ReceivedFrame& frame, const std::vector<UserState>& states, int j) {
  if (j < 0 || j >= static_cast<int>(states.size()))
    throw std::invalid_argument("cancel: unknown user");
  CxVec y_j = frame.y;
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    if (i == j) continue;
    if (states[static_cast<std::size_t>(i)].tx_soft.size() != y_j.size())
      throw std::invalid_argument("cancel: state frame length mismatch");
    y_j -= states[static_cast<std::size_t>(i)].tx_soft;
  }
  return y_j;
}

RealVec effective_variance(const std::vector<UserState>& states, int j, double sigma2,
                           bool per_position, int frame_len) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("effective_variance: sigma2 must be positive");
  RealVec var = RealVec::Constant(frame_len, sigma2);
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    if (i == j) continue;
    const UserState& st = states[static_cast<std::size_t>(i)];
    var += st.cfg.power * (1.0 - st.soft_abs.square());
  }
  if (!per_position) var.setConstant(var.mean());
  return var;
}

namespace {

StopCriterion stop_for_user(const ReceiverConfig& cfg, const UserConfig& user,
                            const std::vector<BitVec>* genie_u, int j) {
  switch (cfg.stop_rule) {
    case StopRule::GMatrix:
      return StopCriterion::gmatrix();
    case StopRule::Crc:
      if (!user.crc) throw std::invalid_argument("receive: CRC stop needs a per-user CrcSpec");
      return StopCriterion::with_crc(*user.crc);
    case StopRule::Genie:
      if (!genie_u || j >= static_cast<int>(genie_u->size()))
        throw std::invalid_argument("receive: genie stop needs the true bits per user");
      return StopCriterion::genie((*genie_u)[static_cast<std::size_t>(j)]);
    case StopRule::None:
      return StopCriterion::none();
  }
  return StopCriterion::none();
}

}  // namespace

std::vector<DecodeResult> receive(const ReceivedFrame& frame,
                                  const std::vector<UserConfig>& users,
                                  const ReceiverConfig& cfg,
                                  const std::vector<BitVec>* genie_u) {
  if (users.empty()) throw std::invalid_argument("receive: no users");
  if (cfg.n_it_mud < 1 || cfg.n_it_bp < 1)
    throw std::invalid_argument("receive: n_it_mud and n_it_bp must be >= 1");
  const int frame_len = static_cast<int>(frame.y.size());
  const int K = static_cast<int>(users.size());

  std::vector<UserState> states;
  states.reserve(static_cast<std::size_t>(K));
  std::vector<StopCriterion> stops;
  for (int j = 0; j < K; ++j) {
    states.push_back(make_user_state(users[static_cast<std::size_t>(j)], frame_len));
    stops.push_back(stop_for_user(cfg, users[static_cast<std::size_t>(j)], genie_u, j));
  }

  const double llr_max = cfg.bp.llr_max;
  std::vector<CxVec> y_j(static_cast<std::size_t>(K));
  std::vector<RealVec> var_j(static_cast<std::size_t>(K));

  for (int t = 0; t < cfg.n_it_mud; ++t) {
    // Parallel cancellation: every user cancels against the previous outer
    // iteration's feedback, so inputs are captured before any state changes.
    for (int j = 0; j < K; ++j) {
      if (states[static_cast<std::size_t>(j)].stopped) continue;
      y_j[static_cast<std::size_t>(j)] = cancel(frame, states, j);
      var_j[static_cast<std::size_t>(j)] =
          effective_variance(states, j, frame.sigma2, cfg.variance_per_position, frame_len);
    }

    bool all_stopped = true;
    for (int j = 0; j < K; ++j) {
      UserState& st = states[static_cast<std::size_t>(j)];
      if (st.stopped) continue;

      const LlrVec L_tx = demap(y_j[static_cast<std::size_t>(j)], st.cfg,
                                var_j[static_cast<std::size_t>(j)]);
      const LlrVec L_dei = st.pi.deinterleave(L_tx);
      const LlrVec L_comb = repeat_combine(L_dei, st.cfg.d_r);

      if (cfg.reset_fg) {
        DecoderConfig dc = cfg.bp;
        dc.max_iters_per_graph = cfg.n_it_bp;
        dc.stop = stops[static_cast<std::size_t>(j)];
        st.result = decode(L_comb, st.cfg.A, dc, st.fg);
        st.fg_valid = true;
      } else {
        if (!st.fg_valid) {
          st.fg = initialize(L_comb, st.cfg.A, llr_max);
          st.fg_valid = true;
        }
        st.result = decode_warm(st.fg, L_comb, cfg.n_it_bp, stops[static_cast<std::size_t>(j)]);
      }

      // Feedback per transmitted copy. Extrinsic mode subtracts each copy's
      // own demapped observation from the code-bit posterior (equality-node
      // rule; equals R(n,:) when d_r = 1), APP mode keeps the full posterior.
      const int N_code = st.cfg.A.N;
      LlrVec lam_rep(frame_len);
      if (st.result.stopped_early) {
        // Freeze this user: saturated hard-decision feedback from here on.
        st.stopped = true;
        LlrVec sat(N_code);
        for (int i = 0; i < N_code; ++i)
          sat[i] = st.result.x_hat[i] ? -llr_max : llr_max;
        lam_rep = repeat_duplicate(sat, st.cfg.d_r);
      } else {
        const LlrVec app_cb =
            (st.fg.R.row(st.fg.n()) + st.fg.L.row(st.fg.n())).transpose();
        if (cfg.feedback == FeedbackMode::Extrinsic) {
          for (int m = 0; m < st.cfg.d_r; ++m)
            lam_rep.segment(m * N_code, N_code) =
                app_cb - L_dei.segment(m * N_code, N_code);
        } else {
          lam_rep = repeat_duplicate(app_cb, st.cfg.d_r);
        }
        all_stopped = false;
      }

      const LlrVec lam_tx = st.pi.interleave(lam_rep);
      st.soft_abs = soft_symbols(lam_tx);
      const std::complex<double> w = std::sqrt(st.cfg.power) * std::polar(1.0, st.cfg.phi);
      st.tx_soft = w * st.soft_abs.cast<std::complex<double>>();
    }
    if (all_stopped) break;
  }

  std::vector<DecodeResult> results;
  results.reserve(static_cast<std::size_t>(K));
  for (UserState& st : states) results.push_back(std::move(st.result));
  return results;
}

}  // namespace pidma
