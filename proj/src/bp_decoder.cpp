#include "pidma/bp_decoder.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "pidma/rng.hpp"

namespace pidma {

FactorGraphState initialize(const LlrVec& L_ch, const InformationSet& A, double llr_max) {
  if (static_cast<int>(L_ch.size()) != A.N)
    throw std::invalid_argument("initialize: |L_ch| != N");
  if (!(llr_max > 0.0)) throw std::invalid_argument("initialize: llr_max must be positive");
  for (int i = 0; i < A.N; ++i)
    if (!std::isfinite(L_ch[i]))
      throw std::invalid_argument("initialize: channel LLRs must be finite");

  FactorGraphState st;
  st.A = A;
  st.llr_max = llr_max;
  st.L = LlrMat::Zero(A.n + 1, A.N);
  st.R = LlrMat::Zero(A.n + 1, A.N);
  for (int i = 0; i < A.N; ++i) {
    st.L(A.n, i) = clamp_llr(L_ch[i], llr_max);
    if (!A.a[i]) st.R(0, i) = llr_max;
  }
  return st;
}

std::vector<int> identity_schedule(int n) {
  std::vector<int> s(n);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

std::vector<int> permuted_schedule(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> s = rng.permutation(n);
  for (int& v : s) ++v;
  return s;
}

namespace {

void check_schedule(const std::vector<int>& schedule, int n) {
  if (static_cast<int>(schedule.size()) != n)
    throw std::invalid_argument("one_iteration: schedule must be a permutation of {1..n}");
  std::uint64_t mask = 0;
  for (int s : schedule) {
    if (s < 1 || s > n || (mask & (1ULL << s)))
      throw std::invalid_argument("one_iteration: schedule must be a permutation of {1..n}");
    mask |= 1ULL << s;
  }
}

// Scalar boxplus for the short-stride stages; skips the correction terms
// once they fall below double resolution.
inline double boxplus_fast(double x, double y) {
  const double s = std::copysign(1.0, x) * std::copysign(1.0, y);
  double r = s * std::min(std::abs(x), std::abs(y));
  const double a = std::abs(x + y);
  const double b = std::abs(x - y);
  if (a < 40.0) r += std::log1p(std::exp(-a));
  if (b < 40.0) r -= std::log1p(std::exp(-b));
  return r;
}

// Vectorized boxplus over Eigen array expressions.
template <class X, class Y>
inline auto vbox(const X& x, const Y& y) {
  return x.sign() * y.sign() * x.abs().min(y.abs()) +
         ((-(x + y).abs()).exp() + 1.0).log() - ((-(x - y).abs()).exp() + 1.0).log();
}

// Stage s pairs (i, i+h) with h = 2^(s-1); updates columns of one side only,
// so all N/2 PEs of a stage read pre-stage values by construction.
void stage_update_L(FactorGraphState& st, int s) {
  const int N = st.N();
  const int h = 1 << (s - 1);
  const double lm = st.llr_max;
  if (h >= 8) {
    for (int b = 0; b < N; b += 2 * h) {
      auto L1 = st.L.row(s).segment(b, h);
      auto L2 = st.L.row(s).segment(b + h, h);
      auto R1 = st.R.row(s - 1).segment(b, h);
      auto R2 = st.R.row(s - 1).segment(b + h, h);
      st.L.row(s - 1).segment(b, h) = vbox(L1, (L2 + R2).eval()).min(lm).max(-lm);
      st.L.row(s - 1).segment(b + h, h) = (vbox(R1, L1) + L2).min(lm).max(-lm);
    }
    return;
  }
  for (int b = 0; b < N; b += 2 * h) {
    for (int i1 = b; i1 < b + h; ++i1) {
      const int i2 = i1 + h;
      const double L1 = st.L(s, i1), L2 = st.L(s, i2);
      const double R1 = st.R(s - 1, i1), R2 = st.R(s - 1, i2);
      st.L(s - 1, i1) = clamp_llr(boxplus_fast(L1, L2 + R2), lm);
      st.L(s - 1, i2) = clamp_llr(boxplus_fast(R1, L1) + L2, lm);
    }
  }
}

void stage_update_R(FactorGraphState& st, int s) {
  const int N = st.N();
  const int h = 1 << (s - 1);
  const double lm = st.llr_max;
  if (h >= 8) {
    for (int b = 0; b < N; b += 2 * h) {
      auto L1 = st.L.row(s).segment(b, h);
      auto L2 = st.L.row(s).segment(b + h, h);
      auto R1 = st.R.row(s - 1).segment(b, h);
      auto R2 = st.R.row(s - 1).segment(b + h, h);
      st.R.row(s).segment(b, h) = vbox(R1, (L2 + R2).eval()).min(lm).max(-lm);
      st.R.row(s).segment(b + h, h) = (vbox(R1, L1) + R2).min(lm).max(-lm);
    }
    return;
  }
  for (int b = 0; b < N; b += 2 * h) {
    for (int i1 = b; i1 < b + h; ++i1) {
      const int i2 = i1 + h;
      const double L1 = st.L(s, i1), L2 = st.L(s, i2);
      const double R1 = st.R(s - 1, i1), R2 = st.R(s - 1, i2);
      st.R(s, i1) = clamp_llr(boxplus_fast(R1, L2 + R2), lm);
      st.R(s, i2) = clamp_llr(boxplus_fast(R1, L1) + R2, lm);
    }
  }
}

}  // namespace

void one_iteration(FactorGraphState& state, const std::vector<int>& schedule) {
  check_schedule(schedule, state.n());
  for (auto it = schedule.rbegin(); it != schedule.rend(); ++it) stage_update_L(state, *it);
  for (int s : schedule) stage_update_R(state, s);
}

BitVec llr2bit(const LlrVec& v) {
  BitVec b(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) b[i] = v[i] < 0.0 ? 1 : 0;
  return b;
}

BitVec hard_info_bits(const FactorGraphState& state) {
  BitVec u(state.A.k);
  int pos = 0;
  for (int i = 0; i < state.N(); ++i)
    if (state.A.a[i]) u[pos++] = (state.L(0, i) + state.R(0, i)) < 0.0 ? 1 : 0;
  return u;
}

BitVec hard_code_bits(const FactorGraphState& state) {
  const int n = state.n();
  BitVec x(state.N());
  for (int i = 0; i < state.N(); ++i)
    x[i] = (state.L(n, i) + state.R(n, i)) < 0.0 ? 1 : 0;
  return x;
}

bool check_stop(const FactorGraphState& state, const StopCriterion& criterion) {
  switch (criterion.rule) {
    case StopRule::GMatrix: {
      const BitVec u_hat = hard_info_bits(state);
      const BitVec x_hat = hard_code_bits(state);
      return (encode(u_hat, state.A) == x_hat).all();
    }
    case StopRule::Crc: {
      const BitVec u_hat = hard_info_bits(state);
      return crc_check(u_hat, *criterion.crc);
    }
    case StopRule::Genie: {
      if (static_cast<int>(criterion.u_true.size()) != state.A.k)
        throw std::invalid_argument("check_stop: genie bits have wrong length");
      const BitVec u_hat = hard_info_bits(state);
      return (u_hat == criterion.u_true).all();
    }
    case StopRule::None:
      return false;
  }
  return false;
}

namespace {

DecodeResult result_from_state(const FactorGraphState& st, bool stopped, int graphs, int iters) {
  DecodeResult res;
  res.u_hat = hard_info_bits(st);
  res.x_hat = hard_code_bits(st);
  res.stopped_early = stopped;
  res.graphs_used = graphs;
  res.iters_used = iters;
  res.ext_out = st.R.row(st.n()).transpose();
  return res;
}

}  // namespace

DecodeResult decode(const LlrVec& L_ch, const InformationSet& A, const DecoderConfig& cfg,
                    FactorGraphState& final_state) {
  if (cfg.max_iters_per_graph < 1 || cfg.num_graphs < 1)
    throw std::invalid_argument("decode: I and q must be >= 1");

  int iters = 0;
  for (int g = 1; g <= cfg.num_graphs; ++g) {
    const std::vector<int> schedule =
        g == 1 ? identity_schedule(A.n)
               : permuted_schedule(A.n, cfg.schedule_seed + static_cast<std::uint64_t>(g));
    final_state = initialize(L_ch, A, cfg.llr_max);
    for (int it = 0; it < cfg.max_iters_per_graph; ++it) {
      one_iteration(final_state, schedule);
      ++iters;
      const bool satisfied = check_stop(final_state, cfg.stop);
      if (cfg.trace) {
        *cfg.trace << g << ',' << it + 1 << ',' << (satisfied ? 1 : 0) << ',';
        const BitVec u_hat = hard_info_bits(final_state);
        for (int b = 0; b < final_state.A.k; ++b) *cfg.trace << int(u_hat[b]);
        *cfg.trace << '\n';
      }
      if (satisfied) return result_from_state(final_state, true, g, iters);
    }
  }
  return result_from_state(final_state, false, cfg.num_graphs, iters);
}

DecodeResult decode(const LlrVec& L_ch, const InformationSet& A, const DecoderConfig& cfg) {
  FactorGraphState st;
  return decode(L_ch, A, cfg, st);
}

DecodeResult decode_warm(FactorGraphState& state, const LlrVec& L_ch_new, int iters,
                         const StopCriterion& stop) {
  if (static_cast<int>(L_ch_new.size()) != state.N())
    throw std::invalid_argument("decode_warm: |L_ch| != N of prior state");
  if (iters < 0) throw std::invalid_argument("decode_warm: iters must be >= 0");

  const int n = state.n();
  for (int i = 0; i < state.N(); ++i) state.L(n, i) = clamp_llr(L_ch_new[i], state.llr_max);

  const std::vector<int> schedule = identity_schedule(n);
  for (int it = 0; it < iters; ++it) {
    one_iteration(state, schedule);
    if (check_stop(state, stop)) return result_from_state(state, true, 1, it + 1);
  }
  return result_from_state(state, false, 1, iters);
}

}  // namespace pidma
