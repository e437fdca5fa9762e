// Monte Carlo BLER/BER sweeps, CSV emission, frozen-channel-chart rendering
// and the encoder-level repetition-equivalence checker.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pidma/soic_receiver.hpp"

namespace pidma {

struct DesignSpec {
  enum class Rule { Bhattacharyya, File };
  Rule rule = Rule::Bhattacharyya;
  double z0 = 0.5;
  std::string path;  // reliability-order file for Rule::File
};

// Builds the A-vector (and order) for one code under the given design.
std::pair<InformationSet, ReliabilityOrder> build_design(const DesignSpec& design, int N, int k);

struct SimConfig {
  int users = 1;
  int N = 512;
  int k = 128;
  int d_r = 1;
  DesignSpec design;
  std::vector<double> powers;        // empty: all users at P = 1
  bool random_phases = true;         // false: use fixed_phases
  std::vector<double> fixed_phases;  // radians, one per user (cycled if short)
  std::vector<double> ebn0_db;
  long max_trials = 10000;
  long max_block_errors = 100;
  std::uint64_t master_seed = 1;
  ReceiverConfig rx;
  CrcSpec crc;      // attached to messages when rx.stop_rule == Crc
  int threads = 0;  // 0: hardware concurrency
  std::string out_path;

  double power_of(int user) const;
  double rate_user() const {
    return static_cast<double>(k) / static_cast<double>(N) / d_r;
  }
};

// One sweep point.
struct BlerRecord {
  double ebn0_db = 0.0;
  long trials = 0;
  long block_errors = 0;  // frames where any user's u_hat != u
  std::vector<long> per_user_block_errors;
  long bit_errors = 0;
  double elapsed_s = 0.0;
  std::uint64_t seed = 0;
  std::string config_digest;

  double bler() const { return trials ? static_cast<double>(block_errors) / trials : 0.0; }
};

// 95% (z = 1.96) Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(long errors, long trials, double z = 1.96);

std::string config_digest(const SimConfig& cfg);
// Canonical key=value rendering of a config; also the digest preimage.
std::string canonical_config(const SimConfig& cfg);

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const BlerRecord& rec, long info_bits_per_trial);

// Runs every Eb/N0 point until max_trials or max_block_errors, emitting CSV
// rows incrementally when csv is non-null. Trials are distributed over
// threads and merged in trial order, so thread count never changes output.
std::vector<BlerRecord> run_sweep(const SimConfig& cfg, std::ostream* csv);

// Frozen channel chart: A permuted by decreasing Bhattacharyya reliability,
// reshaped row-major to height x width. CSV entries: 1 = frozen, 0 = not.
// pgm_path optionally adds a P2 graymap (white = non-frozen).
void emit_fcc(const InformationSet& A, const ReliabilityOrder& order, int width, int height,
              std::ostream& csv);
void emit_fcc_pgm(const InformationSet& A, const ReliabilityOrder& order, int width, int height,
                  std::ostream& pgm);

struct EquivReport {
  bool pass = false;
  long messages_checked = 0;
  bool exhaustive = true;
  std::string counterexample;  // first failing message, as a bit string
};

// Asserts encode over build_equivalent_code(A, d_r) equals the blockwise
// d_r-fold repetition of the original codeword; exhaustive for k <= 16.
EquivReport verify_equivalence(int N, int k, int d_r, const DesignSpec& design);

// Same seeds under (reset_fg = true, reset_iters) and (reset_fg = false,
// persist_iters); emits one CSV per variant.
std::pair<std::vector<BlerRecord>, std::vector<BlerRecord>> run_reset_ablation(
    const SimConfig& base, int reset_iters, int persist_iters, std::ostream* csv_reset,
    std::ostream* csv_persist);

// Flat key = value config format, '#' comments. Unknown keys throw.
void apply_config_kv(SimConfig& cfg, const std::string& key, const std::string& value);
SimConfig load_config_file(const std::string& path);

// "a:b:step" (inclusive) or comma-separated list of dB values.
std::vector<double> parse_ebn0_list(const std::string& text);

}  // namespace pidma
