#include "pidma/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pidma/rng.hpp"

namespace pidma {

std::pair<InformationSet, ReliabilityOrder> build_design(const DesignSpec& design, int N, int k) {
  if (design.rule == DesignSpec::Rule::Bhattacharyya)
    return construct_bhattacharyya(N, k, design.z0);
  ReliabilityOrder ord = load_reliability_order(design.path, N);
  return {info_set_from_order(ord, k), std::move(ord)};
}

double SimConfig::power_of(int user) const {
  if (powers.empty()) return 1.0;
  return powers[static_cast<std::size_t>(user) % powers.size()];
}

std::pair<double, double> wilson_interval(long errors, long trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt_double(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

const char* stop_name(StopRule rule) {
  switch (rule) {
    case StopRule::GMatrix: return "gmatrix";
    case StopRule::Crc: return "crc";
    case StopRule::Genie: return "genie";
    case StopRule::None: return "none";
  }
  return "?";
}

}  // namespace

std::string canonical_config(const SimConfig& cfg) {
  std::ostringstream os;
  os << "users=" << cfg.users << "\n";
  os << "N=" << cfg.N << "\n";
  os << "k=" << cfg.k << "\n";
  os << "dr=" << cfg.d_r << "\n";
  if (cfg.design.rule == DesignSpec::Rule::Bhattacharyya)
    os << "design=bhatt\nz0=" << fmt_double("%.9g", cfg.design.z0) << "\n";
  else
    os << "design=file:" << cfg.design.path << "\n";
  os << "powers=";
  if (cfg.powers.empty()) {
    os << "1";
  } else {
    for (std::size_t i = 0; i < cfg.powers.size(); ++i)
      os << (i ? ";" : "") << fmt_double("%.9g", cfg.powers[i]);
  }
  os << "\n";
  os << "phases=";
  if (cfg.random_phases) {
    os << "random";
  } else {
    for (std::size_t i = 0; i < cfg.fixed_phases.size(); ++i)
      os << (i ? ";" : "") << fmt_double("%.9g", cfg.fixed_phases[i]);
  }
  os << "\n";
  os << "ebn0=";
  for (std::size_t i = 0; i < cfg.ebn0_db.size(); ++i)
    os << (i ? ";" : "") << fmt_double("%.9g", cfg.ebn0_db[i]);
  os << "\n";
  os << "trials=" << cfg.max_trials << "\n";
  os << "max_block_errors=" << cfg.max_block_errors << "\n";
  os << "seed=" << cfg.master_seed << "\n";
  os << "it_mud=" << cfg.rx.n_it_mud << "\n";
  os << "it_bp=" << cfg.rx.n_it_bp << "\n";
  os << "reset_fg=" << (cfg.rx.reset_fg ? "on" : "off") << "\n";
  os << "stop=" << stop_name(cfg.rx.stop_rule) << "\n";
  os << "q=" << cfg.rx.bp.num_graphs << "\n";
  os << "feedback=" << (cfg.rx.feedback == FeedbackMode::Extrinsic ? "ext" : "app") << "\n";
  os << "llr_max=" << fmt_double("%.9g", cfg.rx.bp.llr_max) << "\n";
  os << "var_mode=" << (cfg.rx.variance_per_position ? "pos" : "avg") << "\n";
  if (cfg.rx.stop_rule == StopRule::Crc)
    os << "crc_width=" << cfg.crc.width << "\ncrc_poly=0x" << std::hex << cfg.crc.poly
       << std::dec << "\n";
  // Conventions baked into the outputs, recorded for reproducibility.
  os << "ebn0_convention=per_user\n";
  os << "interleaver=mt19937_64-fisher-yates-v1\n";
  return os.str();
}

std::string config_digest(const SimConfig& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config(cfg))));
  return buf;
}

void write_csv_header(std::ostream& os) {
  os << "ebn0_db,trials,block_errors,bler,per_user_block_errors,bit_errors,ber,seed,"
        "config_digest\n";
}

void write_csv_row(std::ostream& os, const BlerRecord& rec, long info_bits_per_trial) {
  os << fmt_double("%.6g", rec.ebn0_db) << ',' << rec.trials << ',' << rec.block_errors << ','
     << fmt_double("%.8g", rec.bler()) << ',';
  for (std::size_t i = 0; i < rec.per_user_block_errors.size(); ++i)
    os << (i ? ";" : "") << rec.per_user_block_errors[i];
  const double total_bits = static_cast<double>(rec.trials) * info_bits_per_trial;
  const double ber = total_bits > 0 ? rec.bit_errors / total_bits : 0.0;
  os << ',' << rec.bit_errors << ',' << fmt_double("%.8g", ber) << ',' << rec.seed << ','
     << rec.config_digest << '\n';
  os.flush();
}

namespace {

struct TrialOutcome {
  std::vector<std::uint8_t> user_err;
  long bit_errors = 0;
};

TrialOutcome run_trial(const SimConfig& cfg, const InformationSet& A, int e_idx, double ebn0_db,
                       long t_idx) {
  const int K = cfg.users;
  const auto e64 = static_cast<std::uint64_t>(e_idx);
  const auto t64 = static_cast<std::uint64_t>(t_idx);

  std::vector<UserConfig> users(static_cast<std::size_t>(K));
  std::vector<BitVec> messages(static_cast<std::size_t>(K));
  std::vector<CxVec> signals(static_cast<std::size_t>(K));
  std::vector<double> powers(static_cast<std::size_t>(K));

  for (int i = 0; i < K; ++i) {
    UserConfig& uc = users[static_cast<std::size_t>(i)];
    uc.user_id = i;
    uc.power = cfg.power_of(i);
    uc.d_r = cfg.d_r;
    uc.A = A;
    if (cfg.rx.stop_rule == StopRule::Crc) uc.crc = cfg.crc;
    powers[static_cast<std::size_t>(i)] = uc.power;

    if (cfg.random_phases) {
      Rng phase_rng(derive_seed({cfg.master_seed, e64, t64,
                                 static_cast<std::uint64_t>(StreamRole::Phase),
                                 static_cast<std::uint64_t>(i)}));
      uc.phi = std::numbers::pi * phase_rng.uniform01();
    } else {
      uc.phi = cfg.fixed_phases[static_cast<std::size_t>(i) % cfg.fixed_phases.size()];
    }

    uc.interleaver_seed = derive_seed({cfg.master_seed, e64, t64,
                                       static_cast<std::uint64_t>(StreamRole::Interleaver),
                                       static_cast<std::uint64_t>(i)});

    Rng msg_rng(derive_seed({cfg.master_seed, e64, t64,
                             static_cast<std::uint64_t>(StreamRole::Message),
                             static_cast<std::uint64_t>(i)}));
    BitVec& u = messages[static_cast<std::size_t>(i)];
    if (cfg.rx.stop_rule == StopRule::Crc) {
      const int payload_len = A.k - cfg.crc.width;
      if (payload_len < 1) throw std::invalid_argument("run_sweep: CRC wider than k-1");
      BitVec payload(payload_len);
      for (int b = 0; b < payload_len; ++b) payload[b] = msg_rng.bit();
      u = crc_attach(payload, cfg.crc);
    } else {
      u = BitVec(A.k);
      for (int b = 0; b < A.k; ++b) u[b] = msg_rng.bit();
    }

    const Interleaver pi = Interleaver::random(uc.frame_len(), uc.interleaver_seed);
    signals[static_cast<std::size_t>(i)] = transmit_chain(u, uc, pi);
  }

  ChannelConfig ch;
  ch.K_a = K;
  ch.sigma2 = sigma2_from_ebn0(ebn0_db, cfg.rate_user(), cfg.power_of(0));
  ch.seed = derive_seed({cfg.master_seed, e64, t64,
                         static_cast<std::uint64_t>(StreamRole::Noise)});
  const ReceivedFrame frame = transmit(signals, powers, ch);

  const std::vector<BitVec>* genie =
      cfg.rx.stop_rule == StopRule::Genie ? &messages : nullptr;
  const std::vector<DecodeResult> results = receive(frame, users, cfg.rx, genie);

  TrialOutcome out;
  out.user_err.resize(static_cast<std::size_t>(K), 0);
  for (int i = 0; i < K; ++i) {
    const BitVec& u = messages[static_cast<std::size_t>(i)];
    const BitVec& u_hat = results[static_cast<std::size_t>(i)].u_hat;
    long diff = 0;
    for (int b = 0; b < A.k; ++b) diff += u[b] != u_hat[b];
    out.bit_errors += diff;
    out.user_err[static_cast<std::size_t>(i)] = diff > 0;
  }
  return out;
}

}  // namespace

std::vector<BlerRecord> run_sweep(const SimConfig& cfg, std::ostream* csv) {
  if (cfg.ebn0_db.empty()) throw std::invalid_argument("run_sweep: empty ebn0 list");
  if (cfg.max_trials < 1) throw std::invalid_argument("run_sweep: max_trials must be >= 1");
  if (cfg.users < 1) throw std::invalid_argument("run_sweep: need at least one user");
  if (!cfg.random_phases && cfg.fixed_phases.empty())
    throw std::invalid_argument("run_sweep: fixed phase policy needs phase values");

  const auto [A, order] = build_design(cfg.design, cfg.N, cfg.k);
  (void)order;
  const std::string digest = config_digest(cfg);
  const long info_bits_per_trial = static_cast<long>(cfg.users) * cfg.k;

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;

  if (csv) write_csv_header(*csv);

  std::vector<BlerRecord> records;
  for (std::size_t e = 0; e < cfg.ebn0_db.size(); ++e) {
    const double ebn0 = cfg.ebn0_db[e];
    const auto t0 = std::chrono::steady_clock::now();

    BlerRecord rec;
    rec.ebn0_db = ebn0;
    rec.seed = cfg.master_seed;
    rec.config_digest = digest;
    rec.per_user_block_errors.assign(static_cast<std::size_t>(cfg.users), 0);

    long t_next = 0;
    bool stop = false;
    while (!stop && t_next < cfg.max_trials) {
      const long wave = std::min<long>(cfg.max_trials - t_next,
                                       threads == 1 ? 1 : static_cast<long>(threads) * 8);
      std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(wave));

      if (threads == 1 || wave == 1) {
        for (long w = 0; w < wave; ++w)
          outcomes[static_cast<std::size_t>(w)] =
              run_trial(cfg, A, static_cast<int>(e), ebn0, t_next + w);
      } else {
        std::atomic<long> next{0};
        auto worker = [&] {
          while (true) {
            const long w = next.fetch_add(1);
            if (w >= wave) break;
            outcomes[static_cast<std::size_t>(w)] =
                run_trial(cfg, A, static_cast<int>(e), ebn0, t_next + w);
          }
        };
        std::vector<std::thread> pool;
        for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
        worker();
        for (std::thread& th : pool) th.join();
      }

      // Merge strictly in trial order; outcomes past the stop rule are
      // discarded so the thread count never changes the CSV.
      for (long w = 0; w < wave; ++w) {
        const TrialOutcome& out = outcomes[static_cast<std::size_t>(w)];
        ++rec.trials;
        bool any = false;
        for (int i = 0; i < cfg.users; ++i) {
          if (out.user_err[static_cast<std::size_t>(i)]) {
            ++rec.per_user_block_errors[static_cast<std::size_t>(i)];
            any = true;
          }
        }
        rec.block_errors += any;
        rec.bit_errors += out.bit_errors;
        if (rec.block_errors >= cfg.max_block_errors) {
          stop = true;
          break;
        }
      }
      t_next += wave;
    }

    rec.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (csv) write_csv_row(*csv, rec, info_bits_per_trial);
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

// Frozen flags traversed by decreasing Bhattacharyya parameter (least
// reliable first), i.e. the reliability order reversed.
std::vector<int> fcc_cells(const InformationSet& A, const ReliabilityOrder& order) {
  if (order.N != A.N) throw std::invalid_argument("emit_fcc: order/code length mismatch");
  std::vector<int> cells(static_cast<std::size_t>(A.N));
  for (int t = 0; t < A.N; ++t) {
    const int idx = order.order[static_cast<std::size_t>(A.N - 1 - t)];
    cells[static_cast<std::size_t>(t)] = A.a[idx] ? 0 : 1;
  }
  return cells;
}

}  // namespace

void emit_fcc(const InformationSet& A, const ReliabilityOrder& order, int width, int height,
              std::ostream& csv) {
  if (width < 1 || height < 1 || width * height != A.N)
    throw std::invalid_argument("emit_fcc: width*height must equal N");
  const std::vector<int> cells = fcc_cells(A, order);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c)
      csv << (c ? "," : "") << cells[static_cast<std::size_t>(r * width + c)];
    csv << '\n';
  }
}

void emit_fcc_pgm(const InformationSet& A, const ReliabilityOrder& order, int width, int height,
                  std::ostream& pgm) {
  if (width < 1 || height < 1 || width * height != A.N)
    throw std::invalid_argument("emit_fcc_pgm: width*height must equal N");
  const std::vector<int> cells = fcc_cells(A, order);
  pgm << "P2\n" << width << ' ' << height << "\n1\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c)
      pgm << (c ? " " : "") << (1 - cells[static_cast<std::size_t>(r * width + c)]);
    pgm << '\n';
  }
}

EquivReport verify_equivalence(int N, int k, int d_r, const DesignSpec& design) {
  const auto [A, order] = build_design(design, N, k);
  (void)order;
  const InformationSet A_eq = build_equivalent_code(A, d_r);

  EquivReport report;
  report.exhaustive = k <= 16;
  const long total = report.exhaustive ? (1L << k) : 4096;

  Rng rng(0x5eedULL);
  for (long m = 0; m < total; ++m) {
    BitVec u(k);
    if (report.exhaustive) {
      for (int b = 0; b < k; ++b) u[b] = static_cast<std::uint8_t>((m >> b) & 1);
    } else {
      for (int b = 0; b < k; ++b) u[b] = rng.bit();
    }
    const BitVec repeated = repeat_encode(encode(u, A), d_r);
    const BitVec equivalent = encode(u, A_eq);
    ++report.messages_checked;
    if (!(repeated == equivalent).all()) {
      report.pass = false;
      std::string s(static_cast<std::size_t>(k), '0');
      for (int b = 0; b < k; ++b)
        if (u[b]) s[static_cast<std::size_t>(b)] = '1';
      report.counterexample = s;
      return report;
    }
  }
  report.pass = true;
  return report;
}

std::pair<std::vector<BlerRecord>, std::vector<BlerRecord>> run_reset_ablation(
    const SimConfig& base, int reset_iters, int persist_iters, std::ostream* csv_reset,
    std::ostream* csv_persist) {
  SimConfig reset_cfg = base;
  reset_cfg.rx.reset_fg = true;
  reset_cfg.rx.n_it_bp = reset_iters;
  SimConfig persist_cfg = base;
  persist_cfg.rx.reset_fg = false;
  persist_cfg.rx.n_it_bp = persist_iters;

  auto reset_records = run_sweep(reset_cfg, csv_reset);
  auto persist_records = run_sweep(persist_cfg, csv_persist);
  return {std::move(reset_records), std::move(persist_records)};
}

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  const char delim = text.find(';') != std::string::npos ? ';' : ',';
  std::vector<double> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, delim)) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected on/off, got '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<double> parse_ebn0_list(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
      throw std::invalid_argument("parse_ebn0_list: expected a:b:step");
    std::vector<double> out;
    for (double v = a; v <= b + 1e-9; v += step) out.push_back(v);
    return out;
  }
  return parse_double_list(text);
}

void apply_config_kv(SimConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "users") cfg.users = std::stoi(value);
  else if (key == "N") cfg.N = std::stoi(value);
  else if (key == "k") cfg.k = std::stoi(value);
  else if (key == "rc") cfg.k = static_cast<int>(std::lround(std::stod(value) * cfg.N));
  else if (key == "dr") cfg.d_r = std::stoi(value);
  else if (key == "design") {
    if (value == "bhatt") {
      cfg.design.rule = DesignSpec::Rule::Bhattacharyya;
    } else if (value.rfind("file:", 0) == 0) {
      cfg.design.rule = DesignSpec::Rule::File;
      cfg.design.path = value.substr(5);
    } else {
      throw std::invalid_argument("design must be 'bhatt' or 'file:PATH'");
    }
  } else if (key == "z0") cfg.design.z0 = std::stod(value);
  else if (key == "powers") cfg.powers = parse_double_list(value);
  else if (key == "phases") {
    if (value == "random") {
      cfg.random_phases = true;
    } else {
      cfg.random_phases = false;
      cfg.fixed_phases = parse_double_list(value);
    }
  } else if (key == "ebn0") cfg.ebn0_db = parse_ebn0_list(value);
  else if (key == "trials") cfg.max_trials = std::stol(value);
  else if (key == "max_block_errors") cfg.max_block_errors = std::stol(value);
  else if (key == "seed") cfg.master_seed = std::stoull(value);
  else if (key == "it_mud") cfg.rx.n_it_mud = std::stoi(value);
  else if (key == "it_bp") cfg.rx.n_it_bp = std::stoi(value);
  else if (key == "reset_fg") cfg.rx.reset_fg = parse_bool(value);
  else if (key == "stop") {
    if (value == "gmatrix") cfg.rx.stop_rule = StopRule::GMatrix;
    else if (value == "crc") cfg.rx.stop_rule = StopRule::Crc;
    else if (value == "genie") cfg.rx.stop_rule = StopRule::Genie;
    else if (value == "none") cfg.rx.stop_rule = StopRule::None;
    else throw std::invalid_argument("stop must be gmatrix|crc|genie|none");
  } else if (key == "q") cfg.rx.bp.num_graphs = std::stoi(value);
  else if (key == "feedback") {
    if (value == "ext") cfg.rx.feedback = FeedbackMode::Extrinsic;
    else if (value == "app") cfg.rx.feedback = FeedbackMode::App;
    else throw std::invalid_argument("feedback must be ext|app");
  } else if (key == "llr_max") cfg.rx.bp.llr_max = std::stod(value);
  else if (key == "var_mode") {
    if (value == "pos") cfg.rx.variance_per_position = true;
    else if (value == "avg") cfg.rx.variance_per_position = false;
    else throw std::invalid_argument("var_mode must be pos|avg");
  } else if (key == "crc_width") cfg.crc.width = std::stoi(value);
  else if (key == "crc_poly") cfg.crc.poly = std::stoull(value, nullptr, 0);
  else if (key == "schedule_seed") cfg.rx.bp.schedule_seed = std::stoull(value);
  else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "out") cfg.out_path = value;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  SimConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace pidma
