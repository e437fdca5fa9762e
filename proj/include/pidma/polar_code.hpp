// Polar code construction, encoding and CRC handling.
//
// Conventions used throughout: natural bit order (no bit-reversal
// permutation), row-vector encoding x = u * F^(x)n with F = [[1,0],[1,1]],
// frozen bits transmit 0, indices are 0-based in code and 1-based in all
// file formats.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pidma/types.hpp"

namespace pidma {

// Frozen / non-frozen mask of a polar code. a[i] == 1 marks an information
// bit-channel, a[i] == 0 a frozen one.
struct InformationSet {
  int N = 0;
  int n = 0;
  int k = 0;
  BitVec a;

  InformationSet() = default;
  // Validates N = 2^n and 0 < sum(a) <= N.
  explicit InformationSet(BitVec mask);
};

// Bit-channel indices listed from most to least reliable.
struct ReliabilityOrder {
  enum class Source { Bhattacharyya, File };

  int N = 0;
  std::vector<int> order;  // permutation of {0..N-1}, most reliable first
  Source source = Source::Bhattacharyya;
  RealVec z;               // Bhattacharyya scores in natural order (empty for File)
};

struct CrcSpec {
  int width = 8;
  std::uint64_t poly = 0x07;       // low 'width' bits, MSB-first convention
  std::uint64_t init = 0;
  std::uint64_t final_xor = 0;
  bool reflect = false;            // reverse the appended check bits
};

// BEC Bhattacharyya recursion (Z- = 2Z - Z^2, Z+ = Z^2) from design erasure
// probability z0; returns scores in natural order plus the sorted order.
ReliabilityOrder bhattacharyya_order(int N, double z0);

// A-vector selecting the k most reliable positions under the BEC recursion.
// Ties in Z freeze the lower natural index.
std::pair<InformationSet, ReliabilityOrder> construct_bhattacharyya(int N, int k, double z0);

// Reads a reliability order from a text file: exactly N lines, one 1-based
// index per line, most reliable first. Throws on duplicates, out-of-range
// entries or a length mismatch.
ReliabilityOrder load_reliability_order(const std::string& path, int N);

InformationSet info_set_from_order(const ReliabilityOrder& order, int k);

// O(N log N) butterfly encoder; equals u_full * F^(x)n over GF(2) with the
// information bits scattered into the non-frozen positions.
BitVec encode(const BitVec& u, const InformationSet& A);

BitVec crc_attach(const BitVec& payload, const CrcSpec& spec);
bool crc_check(const BitVec& word, const CrcSpec& spec);

// Length N*d_r code whose first N*(d_r-1) positions are frozen and whose last
// N positions copy A. Its codewords are the original codewords repeated d_r
// times blockwise. d_r must be a power of two >= 2.
InformationSet build_equivalent_code(const InformationSet& A, int d_r);

double rate(const InformationSet& A);

// Serialization of the A-vector: one line of N '0'/'1' characters.
std::string a_vector_to_string(const InformationSet& A);
InformationSet a_vector_from_string(const std::string& line);
void save_a_vector(const InformationSet& A, const std::string& path);
InformationSet load_a_vector(const std::string& path);

}  // namespace pidma
