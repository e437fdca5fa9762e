#include "pidma/polar_code.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pidma {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
  int n = 0;
  while ((1 << n) < v) ++n;
  return n;
}

}  // namespace

InformationSet::InformationSet(BitVec mask) {
  N = static_cast<int>(mask.size());
  if (!is_power_of_two(N) || N < 2)
    throw std::invalid_argument("InformationSet: N must be a power of two >= 2");
  n = log2_exact(N);
  k = 0;
  for (int i = 0; i < N; ++i) {
    if (mask[i] > 1) throw std::invalid_argument("InformationSet: mask entries must be 0/1");
    k += mask[i];
  }
  if (k < 1) throw std::invalid_argument("InformationSet: at least one information bit required");
  a = std::move(mask);
}

ReliabilityOrder bhattacharyya_order(int N, double z0) {
  if (!is_power_of_two(N) || N < 2)
    throw std::invalid_argument("bhattacharyya_order: N must be a power of two >= 2");
  if (!(z0 > 0.0 && z0 < 1.0))
    throw std::invalid_argument("bhattacharyya_order: z0 must lie in (0, 1)");

  const int n = log2_exact(N);
  RealVec z(N);
  z[0] = z0;
  // Expand level by level; children of z are (2z - z^2, z^2) placed
  // adjacently, which yields natural-order scores for x = u * F^(x)n.
  for (int level = 0; level < n; ++level) {
    const int cur = 1 << level;
    for (int i = cur - 1; i >= 0; --i) {
      const double zi = z[i];
      z[2 * i] = 2.0 * zi - zi * zi;
      z[2 * i + 1] = zi * zi;
    }
  }

  ReliabilityOrder ord;
  ord.N = N;
  ord.source = ReliabilityOrder::Source::Bhattacharyya;
  ord.z = z;
  ord.order.resize(N);
  std::iota(ord.order.begin(), ord.order.end(), 0);
  // Most reliable (smallest Z) first; on ties the lower index sorts later so
  // it falls on the frozen side of any cut.
  std::sort(ord.order.begin(), ord.order.end(), [&z](int i, int j) {
    if (z[i] != z[j]) return z[i] < z[j];
    return i > j;
  });
  return ord;
}

std::pair<InformationSet, ReliabilityOrder> construct_bhattacharyya(int N, int k, double z0) {
  ReliabilityOrder ord = bhattacharyya_order(N, z0);
  InformationSet A = info_set_from_order(ord, k);
  return {std::move(A), std::move(ord)};
}

ReliabilityOrder load_reliability_order(const std::string& path, int N) {
  if (!is_power_of_two(N) || N < 2)
    throw std::invalid_argument("load_reliability_order: N must be a power of two >= 2");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_reliability_order: cannot open " + path);

  ReliabilityOrder ord;
  ord.N = N;
  ord.source = ReliabilityOrder::Source::File;

  std::set<int> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;
    std::istringstream ls(line);
    long idx = 0;
    if (!(ls >> idx)) throw std::runtime_error("load_reliability_order: bad line '" + line + "'");
    if (idx < 1 || idx > N)
      throw std::runtime_error("load_reliability_order: index " + std::to_string(idx) +
                               " out of range 1.." + std::to_string(N));
    if (!seen.insert(static_cast<int>(idx)).second)
      throw std::runtime_error("load_reliability_order: duplicate index " + std::to_string(idx));
    ord.order.push_back(static_cast<int>(idx) - 1);
  }
  if (static_cast<int>(ord.order.size()) != N)
    throw std::runtime_error("load_reliability_order: expected " + std::to_string(N) +
                             " lines, got " + std::to_string(ord.order.size()));
  return ord;
}

InformationSet info_set_from_order(const ReliabilityOrder& order, int k) {
  if (k < 1 || k > order.N)
    throw std::invalid_argument("info_set_from_order: k out of range");
  BitVec a = BitVec::Zero(order.N);
  for (int i = 0; i < k; ++i) a[order.order[static_cast<std::size_t>(i)]] = 1;
  return InformationSet(std::move(a));
}

BitVec encode(const BitVec& u, const InformationSet& A) {
  if (static_cast<int>(u.size()) != A.k)
    throw std::invalid_argument("encode: |u| != k");

  BitVec x = BitVec::Zero(A.N);
  int pos = 0;
  for (int i = 0; i < A.N; ++i)
    if (A.a[i]) x[i] = u[pos++];

  // Stage maps of F^(x)n commute, so any distance order gives the same code.
  for (int h = 1; h < A.N; h <<= 1)
    for (int b = 0; b < A.N; b += 2 * h)
      for (int j = b; j < b + h; ++j) x[j] ^= x[j + h];
  return x;
}

namespace {

std::uint64_t reverse_bits(std::uint64_t v, int width) {
  std::uint64_t r = 0;
  for (int i = 0; i < width; ++i) r |= ((v >> i) & 1ULL) << (width - 1 - i);
  return r;
}

// Bit-serial shift register, MSB-first.
std::uint64_t crc_register(const BitVec& bits, const CrcSpec& spec) {
  const std::uint64_t mask =
      spec.width == 64 ? ~0ULL : ((1ULL << spec.width) - 1ULL);
  std::uint64_t reg = spec.init & mask;
  const std::uint64_t top = 1ULL << (spec.width - 1);
  for (int i = 0; i < static_cast<int>(bits.size()); ++i) {
    const std::uint64_t in = bits[i] & 1;
    const std::uint64_t fb = ((reg & top) ? 1ULL : 0ULL) ^ in;
    reg = (reg << 1) & mask;
    if (fb) reg ^= spec.poly & mask;
  }
  return (reg ^ spec.final_xor) & mask;
}

}  // namespace

BitVec crc_attach(const BitVec& payload, const CrcSpec& spec) {
  if (payload.size() == 0) throw std::invalid_argument("crc_attach: empty payload");
  if (spec.width < 1 || spec.width > 64)
    throw std::invalid_argument("crc_attach: width must be in 1..64");
  std::uint64_t reg = crc_register(payload, spec);
  if (spec.reflect) reg = reverse_bits(reg, spec.width);

  BitVec out(payload.size() + spec.width);
  out.head(payload.size()) = payload;
  for (int i = 0; i < spec.width; ++i)
    out[payload.size() + i] =
        static_cast<std::uint8_t>((reg >> (spec.width - 1 - i)) & 1ULL);
  return out;
}

bool crc_check(const BitVec& word, const CrcSpec& spec) {
  if (static_cast<int>(word.size()) <= spec.width)
    throw std::invalid_argument("crc_check: word no longer than CRC width");
  const auto payload_len = word.size() - spec.width;
  BitVec payload = word.head(payload_len);
  BitVec expect = crc_attach(payload, spec);
  for (int i = 0; i < spec.width; ++i)
    if (expect[payload_len + i] != word[payload_len + i]) return false;
  return true;
}

InformationSet build_equivalent_code(const InformationSet& A, int d_r) {
  if (d_r < 2 || !is_power_of_two(d_r))
    throw std::invalid_argument("build_equivalent_code: d_r must be a power of two >= 2");
  const int N_eq = A.N * d_r;
  BitVec a_eq = BitVec::Zero(N_eq);
  a_eq.tail(A.N) = A.a;
  return InformationSet(std::move(a_eq));
}

double rate(const InformationSet& A) {
  return static_cast<double>(A.k) / static_cast<double>(A.N);
}

std::string a_vector_to_string(const InformationSet& A) {
  std::string s(static_cast<std::size_t>(A.N), '0');
  for (int i = 0; i < A.N; ++i)
    if (A.a[i]) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

void save_a_vector(const InformationSet& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_a_vector: cannot open " + path);
  out << a_vector_to_string(A) << '\n';
}

InformationSet load_a_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_a_vector: cannot open " + path);
  std::string line;
  std::getline(in, line);
  return a_vector_from_string(line);
}

InformationSet a_vector_from_string(const std::string& line) {
  BitVec a(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '0' && line[i] != '1')
      throw std::invalid_argument("a_vector_from_string: characters must be '0'/'1'");
    a[static_cast<Eigen::Index>(i)] = line[i] == '1';
  }
  return InformationSet(std::move(a));
}

}  // namespace pidma
