#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "pidma/polar_code.hpp"
#include "pidma/rng.hpp"

using namespace pidma;
using test::bits_from_string;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    path = std::string(std::tmpnam(nullptr)) + ".order";
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string bit_str(const BitVec& v) {
  std::string s(static_cast<std::size_t>(v.size()), '0');
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i]) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

}  // namespace

TEST_CASE("bhattacharyya recursion matches the spec values") {
  auto [A2, ord2] = construct_bhattacharyya(2, 1, 0.5);
  CHECK(ord2.z[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(ord2.z[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(a_vector_to_string(A2) == "01");

  auto [A4, ord4] = construct_bhattacharyya(4, 2, 0.5);
  const double expect[4] = {0.9375, 0.5625, 0.4375, 0.0625};
  for (int i = 0; i < 4; ++i) CHECK(ord4.z[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  CHECK(a_vector_to_string(A4) == "0011");

  auto [A44, o44] = construct_bhattacharyya(4, 4, 0.5);
  CHECK(a_vector_to_string(A44) == "1111");
}

TEST_CASE("bhattacharyya recursion agrees with the recursive-descent oracle") {
  for (double z0 : {0.2, 0.5, 0.9}) {
    for (int N : {2, 8, 64}) {
      int n = 0;
      while ((1 << n) < N) ++n;
      ReliabilityOrder ord = bhattacharyya_order(N, z0);
      for (int i = 0; i < N; ++i)
        CHECK(ord.z[i] == doctest::Approx(test::bec_z_recursive(i, n, z0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("freezing is monotone in k") {
  ReliabilityOrder ord = bhattacharyya_order(16, 0.5);
  for (int k = 1; k < 16; ++k) {
    InformationSet a_k = info_set_from_order(ord, k);
    InformationSet a_k1 = info_set_from_order(ord, k + 1);
    for (int i = 0; i < 16; ++i)
      if (a_k.a[i]) CHECK(a_k1.a[i] == 1);  // info set grows with k
  }
}

TEST_CASE("construction rejects bad arguments") {
  CHECK_THROWS_AS(construct_bhattacharyya(6, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(construct_bhattacharyya(8, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(construct_bhattacharyya(8, 9, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(construct_bhattacharyya(8, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(construct_bhattacharyya(8, 4, 1.0), std::invalid_argument);
}

TEST_CASE("reliability order file loading") {
  SUBCASE("direct parse") {
    TempFile f("2\n1\n");
    ReliabilityOrder ord = load_reliability_order(f.path, 2);
    REQUIRE(ord.order.size() == 2);
    CHECK(ord.order[0] == 1);  // 1-based "2" -> index 1
    CHECK(ord.order[1] == 0);
    CHECK(ord.source == ReliabilityOrder::Source::File);
  }
  SUBCASE("duplicate index") {
    TempFile f("1\n1\n");
    CHECK_THROWS(load_reliability_order(f.path, 2));
  }
  SUBCASE("length mismatch") {
    TempFile f("1\n2\n3\n");
    CHECK_THROWS(load_reliability_order(f.path, 4));
  }
  SUBCASE("out of range") {
    TempFile f("1\n5\n");
    CHECK_THROWS(load_reliability_order(f.path, 2));
  }
}

TEST_CASE("info set from order") {
  ReliabilityOrder ord;
  ord.N = 4;
  ord.order = {3, 2, 1, 0};  // 1-based (4,3,2,1)
  CHECK(a_vector_to_string(info_set_from_order(ord, 2)) == "0011");
  CHECK(a_vector_to_string(info_set_from_order(ord, 4)) == "1111");
  ReliabilityOrder ord2;
  ord2.N = 2;
  ord2.order = {1, 0};
  CHECK(a_vector_to_string(info_set_from_order(ord2, 1)) == "01");
  CHECK_THROWS_AS(info_set_from_order(ord, 0), std::invalid_argument);
  CHECK_THROWS_AS(info_set_from_order(ord, 5), std::invalid_argument);
}

TEST_CASE("encoder examples against the GF(2) matrix oracle") {
  InformationSet full4(bits_from_string("1111"));
  CHECK((encode(bits_from_string("1000"), full4) == bits_from_string("1000")).all());
  CHECK((encode(bits_from_string("0001"), full4) == bits_from_string("1111")).all());

  InformationSet half4(bits_from_string("0011"));
  BitVec x = encode(bits_from_string("11"), half4);
  CHECK((x == test::matrix_encode(bits_from_string("11"), half4.a)).all());
  CHECK(bit_str(x) == "0101");  // row3^row4 = (0,1,0,1)

  CHECK_THROWS_AS(encode(bits_from_string("1"), half4), std::invalid_argument);
}

TEST_CASE("butterfly equals matrix multiply for all messages, N <= 8") {
  for (int N : {2, 4, 8}) {
    for (int k = 1; k <= N; ++k) {
      auto [A, ord] = construct_bhattacharyya(N, k, 0.5);
      for (long m = 0; m < (1L << k); ++m) {
        BitVec u(k);
        for (int b = 0; b < k; ++b) u[b] = static_cast<std::uint8_t>((m >> b) & 1);
        CHECK((encode(u, A) == test::matrix_encode(u, A.a)).all());
      }
    }
  }
}

TEST_CASE("encoder linearity") {
  Rng rng(123);
  for (int N : {4, 16}) {
    InformationSet A(BitVec::Ones(N));
    for (int trial = 0; trial < 500; ++trial) {
      BitVec u(N), v(N);
      for (int b = 0; b < N; ++b) {
        u[b] = rng.bit();
        v[b] = rng.bit();
      }
      BitVec uv(N);
      for (int b = 0; b < N; ++b) uv[b] = u[b] ^ v[b];
      BitVec lhs = encode(uv, A);
      BitVec x1 = encode(u, A), x2 = encode(v, A);
      for (int b = 0; b < N; ++b) CHECK(lhs[b] == (x1[b] ^ x2[b]));
    }
  }
}

TEST_CASE("crc attach/check") {
  CrcSpec crc8{8, 0x07, 0, 0, false};

  SUBCASE("standard check value 0xF4 over '123456789'") {
    CHECK(test::crc_over_bytes("123456789", 8, 0x07) == 0xF4);
    // Same computation through the bit-vector interface.
    std::string bits;
    for (char c : std::string("123456789"))
      for (int b = 7; b >= 0; --b) bits += ((c >> b) & 1) ? '1' : '0';
    BitVec word = crc_attach(bits_from_string(bits), crc8);
    std::uint64_t checksum = 0;
    for (int i = 0; i < 8; ++i)
      checksum = (checksum << 1) | word[word.size() - 8 + i];
    CHECK(checksum == 0xF4);
    CHECK(crc_check(word, crc8));
  }

  SUBCASE("round trip and single-bit-flip detection") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const int len = 1 + static_cast<int>(rng.below(64));
      BitVec payload(len);
      for (int b = 0; b < len; ++b) payload[b] = rng.bit();
      BitVec word = crc_attach(payload, crc8);
      CHECK(crc_check(word, crc8));
      BitVec flipped = word;
      const int pos = static_cast<int>(rng.below(static_cast<std::uint64_t>(word.size())));
      flipped[pos] ^= 1;
      CHECK_FALSE(crc_check(flipped, crc8));
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(crc_attach(BitVec(), crc8), std::invalid_argument);
    CHECK_THROWS_AS(crc_check(bits_from_string("0101"), crc8), std::invalid_argument);
  }
}

TEST_CASE("equivalent code construction") {
  InformationSet A2(bits_from_string("01"));
  InformationSet eq = build_equivalent_code(A2, 2);
  CHECK(a_vector_to_string(eq) == "0001");
  BitVec u(1);
  u[0] = 1;
  CHECK(bit_str(encode(u, eq)) == "1111");

  InformationSet A4(bits_from_string("0011"));
  InformationSet eq4 = build_equivalent_code(A4, 2);
  CHECK(a_vector_to_string(eq4) == "00000011");

  CHECK_THROWS_AS(build_equivalent_code(A4, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_equivalent_code(A4, 1), std::invalid_argument);
}

TEST_CASE("equivalent-code codewords are blockwise repetitions") {
  for (int N : {2, 4, 8}) {
    for (int d_r : {2, 4}) {
      auto [A, ord] = construct_bhattacharyya(N, N / 2 + 1, 0.5);
      InformationSet eq = build_equivalent_code(A, d_r);
      CHECK(rate(eq) == doctest::Approx(rate(A) / d_r));
      for (long m = 0; m < (1L << A.k); ++m) {
        BitVec u(A.k);
        for (int b = 0; b < A.k; ++b) u[b] = static_cast<std::uint8_t>((m >> b) & 1);
        BitVec base = encode(u, A);
        BitVec big = encode(u, eq);
        for (int r = 0; r < d_r; ++r)
          for (int i = 0; i < N; ++i) CHECK(big[r * N + i] == base[i]);
      }
    }
  }
}

TEST_CASE("rate") {
  CHECK(rate(InformationSet(bits_from_string("01"))) == doctest::Approx(0.5));
  CHECK(rate(InformationSet(bits_from_string("1111"))) == doctest::Approx(1.0));
  auto [A, ord] = construct_bhattacharyya(512, 128, 0.5);
  CHECK(rate(A) == doctest::Approx(0.25));
}

TEST_CASE("a-vector string round trip") {
  InformationSet A(bits_from_string("00110101"));
  CHECK(a_vector_to_string(a_vector_from_string(a_vector_to_string(A))) ==
        a_vector_to_string(A));
  CHECK_THROWS(a_vector_from_string("01x1"));
}
