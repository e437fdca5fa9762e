#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pidma/rng.hpp"
#include "pidma/sim_harness.hpp"
#include "pidma/soic_receiver.hpp"

using namespace pidma;
using test::bits_from_string;

namespace {

UserConfig make_user(int id, const InformationSet& A, int d_r, double power, double phi,
                     std::uint64_t ilv_seed) {
  UserConfig cfg;
  cfg.user_id = id;
  cfg.A = A;
  cfg.d_r = d_r;
  cfg.power = power;
  cfg.phi = phi;
  cfg.interleaver_seed = ilv_seed;
  return cfg;
}

BitVec random_bits(Rng& rng, int len) {
  BitVec u(len);
  for (int b = 0; b < len; ++b) u[b] = rng.bit();
  return u;
}

}  // namespace

TEST_CASE("cancel") {
  auto [A, ord] = construct_bhattacharyya(8, 4, 0.5);
  UserConfig u1 = make_user(0, A, 1, 1.0, 0.0, 11);
  UserConfig u2 = make_user(1, A, 1, 2.0, 0.9, 22);

  ReceivedFrame frame;
  frame.sigma2 = 0.5;
  frame.y = CxVec::Zero(8);
  for (int i = 0; i < 8; ++i) frame.y[i] = {0.3 * i, -0.1 * i};

  std::vector<UserState> states;
  states.push_back(make_user_state(u1, 8));
  states.push_back(make_user_state(u2, 8));

  SUBCASE("no feedback: y_j = y exactly") {
    CHECK((cancel(frame, states, 0) == frame.y).all());
    CHECK((cancel(frame, states, 1) == frame.y).all());
  }
  SUBCASE("single user: empty sum") {
    std::vector<UserState> one;
    one.push_back(make_user_state(u1, 8));
    CHECK((cancel(frame, one, 0) == frame.y).all());
  }
  SUBCASE("perfect feedback removes exactly the reconstructed signal") {
    Rng rng(5);
    Interleaver pi2 = Interleaver::random(8, u2.interleaver_seed);
    BitVec msg = random_bits(rng, 4);
    CxVec x2 = transmit_chain(msg, u2, pi2);
    BitVec tx_bits = pi2.interleave(repeat_encode(encode(msg, u2.A), u2.d_r));
    set_genie_feedback(states[1], tx_bits);
    CxVec y1 = cancel(frame, states, 0);
    CxVec expect = frame.y - std::sqrt(2.0) * x2;
    CHECK((y1 - expect).abs().maxCoeff() < 1e-14);
  }
  SUBCASE("unknown user") { CHECK_THROWS_AS(cancel(frame, states, 2), std::invalid_argument); }
}

TEST_CASE("effective variance") {
  auto [A, ord] = construct_bhattacharyya(8, 4, 0.5);
  std::vector<UserState> states;
  states.push_back(make_user_state(make_user(0, A, 1, 1.0, 0.0, 1), 8));
  states.push_back(make_user_state(make_user(1, A, 1, 1.0, 0.5, 2), 8));

  SUBCASE("no feedback: sigma2 + P of the other user") {
    RealVec var = effective_variance(states, 0, 0.25, true, 8);
    CHECK((var == 1.25).all());
  }
  SUBCASE("perfect feedback: residual zero") {
    set_genie_feedback(states[1], BitVec::Zero(8));
    RealVec var = effective_variance(states, 0, 0.25, true, 8);
    CHECK((var == 0.25).all());
  }
  SUBCASE("single user") {
    std::vector<UserState> one;
    one.push_back(make_user_state(make_user(0, A, 1, 1.0, 0.0, 1), 8));
    CHECK((effective_variance(one, 0, 0.3, true, 8) == 0.3).all());
  }
  SUBCASE("frame-averaged mode is constant and conserves the mean") {
    states[1].soft_abs.setLinSpaced(8, -0.9, 0.9);
    RealVec pos = effective_variance(states, 0, 0.3, true, 8);
    RealVec avg = effective_variance(states, 0, 0.3, false, 8);
    CHECK(avg.maxCoeff() == doctest::Approx(avg.minCoeff()));
    CHECK(avg.mean() == doctest::Approx(pos.mean()));
    CHECK((pos >= 0.3).all());
  }
}

TEST_CASE("single-user receive equals the plain BP decode bit-exactly") {
  Rng rng(1009);
  auto [A, ord] = construct_bhattacharyya(32, 16, 0.5);
  UserConfig uc = make_user(0, A, 2, 1.0, 1.1, 77);
  Interleaver pi = Interleaver::random(uc.frame_len(), uc.interleaver_seed);

  BitVec u = random_bits(rng, 16);
  CxVec x = transmit_chain(u, uc, pi);

  ChannelConfig ch;
  ch.K_a = 1;
  ch.sigma2 = 1.2;
  ch.seed = 4242;
  ReceivedFrame frame = transmit({x}, {uc.power}, ch);

  ReceiverConfig rx;
  rx.n_it_mud = 1;
  rx.n_it_bp = 12;
  rx.reset_fg = true;
  rx.stop_rule = StopRule::GMatrix;

  std::vector<DecodeResult> results = receive(frame, {uc}, rx);

  LlrVec L_tx = demap(frame.y, uc, frame.sigma2);
  LlrVec L_comb = repeat_combine(pi.deinterleave(L_tx), uc.d_r);
  DecoderConfig dc;
  dc.max_iters_per_graph = 12;
  dc.stop = StopCriterion::gmatrix();
  DecodeResult direct = decode(L_comb, A, dc);

  CHECK((results[0].u_hat == direct.u_hat).all());
  CHECK((results[0].x_hat == direct.x_hat).all());
  CHECK(results[0].iters_used == direct.iters_used);
  CHECK(results[0].stopped_early == direct.stopped_early);
  CHECK((results[0].ext_out == direct.ext_out).all());
}

TEST_CASE("noiseless two-user frame with quadrature phases decodes exactly") {
  Rng rng(2023);
  auto [A, ord] = construct_bhattacharyya(16, 8, 0.5);
  UserConfig u1 = make_user(0, A, 1, 1.0, 0.0, 31);
  UserConfig u2 = make_user(1, A, 1, 1.0, std::numbers::pi / 2, 32);

  BitVec m1 = random_bits(rng, 8), m2 = random_bits(rng, 8);
  CxVec x1 = transmit_chain(m1, u1, Interleaver::random(16, u1.interleaver_seed));
  CxVec x2 = transmit_chain(m2, u2, Interleaver::random(16, u2.interleaver_seed));

  ChannelConfig ch;
  ch.K_a = 2;
  ch.sigma2 = 0.0;
  ReceivedFrame frame = transmit({x1, x2}, {1.0, 1.0}, ch);
  frame.sigma2 = 1e-4;  // receiver needs a positive variance

  ReceiverConfig rx;
  rx.n_it_mud = 4;
  rx.n_it_bp = 10;
  rx.reset_fg = true;
  rx.stop_rule = StopRule::GMatrix;

  std::vector<DecodeResult> results = receive(frame, {u1, u2}, rx);
  CHECK((results[0].u_hat == m1).all());
  CHECK((results[1].u_hat == m2).all());
}

TEST_CASE("stopped users stay frozen in later outer iterations") {
  Rng rng(31337);
  auto [A, ord] = construct_bhattacharyya(32, 16, 0.5);
  UserConfig u1 = make_user(0, A, 1, 1.0, 0.2, 51);
  UserConfig u2 = make_user(1, A, 1, 1.0, 1.4, 52);

  BitVec m1 = random_bits(rng, 16), m2 = random_bits(rng, 16);
  CxVec x1 = transmit_chain(m1, u1, Interleaver::random(32, u1.interleaver_seed));
  CxVec x2 = transmit_chain(m2, u2, Interleaver::random(32, u2.interleaver_seed));

  ChannelConfig ch;
  ch.K_a = 2;
  ch.sigma2 = 0.4;
  ch.seed = 777;
  ReceivedFrame frame = transmit({x1, x2}, {1.0, 1.0}, ch);

  ReceiverConfig rx;
  rx.n_it_bp = 8;
  rx.reset_fg = true;
  rx.stop_rule = StopRule::Genie;
  std::vector<BitVec> genie{m1, m2};

  rx.n_it_mud = 3;
  std::vector<DecodeResult> early = receive(frame, {u1, u2}, rx, &genie);
  rx.n_it_mud = 9;
  std::vector<DecodeResult> late = receive(frame, {u1, u2}, rx, &genie);

  for (int j = 0; j < 2; ++j) {
    if (early[static_cast<std::size_t>(j)].stopped_early) {
      CHECK((early[static_cast<std::size_t>(j)].u_hat ==
             late[static_cast<std::size_t>(j)].u_hat).all());
      CHECK((early[static_cast<std::size_t>(j)].ext_out ==
             late[static_cast<std::size_t>(j)].ext_out).all());
    }
  }
  CHECK((early[0].stopped_early || early[1].stopped_early));
}

TEST_CASE("reset versus persistent graphs can disagree") {
  // Regression fixture for the graph-memory phenomenon: captured seed where
  // the warm-started receiver and the resetting receiver return different
  // decisions for the same frames.
  Rng rng(5);
  auto [A, ord] = construct_bhattacharyya(64, 32, 0.5);
  UserConfig u1 = make_user(0, A, 1, 1.0, 0.3, 61);
  UserConfig u2 = make_user(1, A, 1, 1.0, 1.2, 62);

  BitVec m1 = random_bits(rng, 32), m2 = random_bits(rng, 32);
  CxVec x1 = transmit_chain(m1, u1, Interleaver::random(64, u1.interleaver_seed));
  CxVec x2 = transmit_chain(m2, u2, Interleaver::random(64, u2.interleaver_seed));

  ChannelConfig ch;
  ch.K_a = 2;
  ch.sigma2 = 1.1;
  ch.seed = rng.next_u64();
  ReceivedFrame frame = transmit({x1, x2}, {1.0, 1.0}, ch);

  ReceiverConfig reset_rx;
  reset_rx.n_it_mud = 6;
  reset_rx.n_it_bp = 20;
  reset_rx.reset_fg = true;
  reset_rx.stop_rule = StopRule::None;

  ReceiverConfig warm_rx = reset_rx;
  warm_rx.reset_fg = false;
  warm_rx.n_it_bp = 2;

  std::vector<DecodeResult> a = receive(frame, {u1, u2}, reset_rx);
  std::vector<DecodeResult> b = receive(frame, {u1, u2}, warm_rx);
  const bool differ = !(a[0].u_hat == b[0].u_hat).all() || !(a[1].u_hat == b[1].u_hat).all();
  CHECK(differ);
}

TEST_CASE("receive argument validation") {
  auto [A, ord] = construct_bhattacharyya(8, 4, 0.5);
  UserConfig uc = make_user(0, A, 1, 1.0, 0.0, 1);
  ReceivedFrame frame;
  frame.sigma2 = 1.0;
  frame.y = CxVec::Zero(8);

  ReceiverConfig rx;
  rx.stop_rule = StopRule::Genie;
  CHECK_THROWS_AS(receive(frame, {uc}, rx), std::invalid_argument);

  rx.stop_rule = StopRule::Crc;
  CHECK_THROWS_AS(receive(frame, {uc}, rx), std::invalid_argument);

  rx.stop_rule = StopRule::None;
  rx.n_it_mud = 0;
  CHECK_THROWS_AS(receive(frame, {uc}, rx), std::invalid_argument);
}
