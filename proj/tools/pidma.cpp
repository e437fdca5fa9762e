// pidma command line: Monte Carlo sweeps, frozen channel charts, the
// repetition-equivalence checker and the factor-graph reset ablation.
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pidma/sim_harness.hpp"

namespace {

using pidma::SimConfig;

struct CommonFlags {
  std::string config_path;
  std::string users, N, k, dr, rc, ebn0, trials, max_block_errors, it_mud, it_bp;
  std::string reset_fg, stop, q, seed, design, feedback, out, phases, powers, threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "config file (key = value, '#' comments)");
  cmd->add_option("--users", f.users, "number of active users K_a");
  cmd->add_option("--N", f.N, "codeword length (power of two)");
  cmd->add_option("--k", f.k, "information length");
  cmd->add_option("--rc", f.rc, "code rate (alternative to --k)");
  cmd->add_option("--dr", f.dr, "repetition factor");
  cmd->add_option("--ebn0", f.ebn0, "Eb/N0 in dB: a:b:step or comma list");
  cmd->add_option("--trials", f.trials, "max Monte Carlo trials per point");
  cmd->add_option("--max-block-errors", f.max_block_errors, "early stop per point");
  cmd->add_option("--it-mud", f.it_mud, "outer MUD iterations");
  cmd->add_option("--it-bp", f.it_bp, "BP iterations per outer iteration");
  cmd->add_option("--reset-fg", f.reset_fg, "reset factor graph between outer iterations: on|off");
  cmd->add_option("--stop", f.stop, "stop criterion: gmatrix|crc|genie|none");
  cmd->add_option("--q", f.q, "max number of permuted factor graphs");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--design", f.design, "code design: bhatt or file:PATH");
  cmd->add_option("--feedback", f.feedback, "turbo feedback: ext|app");
  cmd->add_option("--phases", f.phases, "random or comma list of radians");
  cmd->add_option("--powers", f.powers, "per-user linear powers, comma list");
  cmd->add_option("--threads", f.threads, "worker threads (0 = auto)");
  cmd->add_option("--out", f.out, "output path ('-' for stdout)");
}

// Defaults, then config file, then explicit flags.
SimConfig build_config(const CLI::App* cmd, const CommonFlags& f) {
  SimConfig cfg;
  if (!f.config_path.empty()) cfg = pidma::load_config_file(f.config_path);

  auto maybe = [&](const char* flag, const char* key, const std::string& value) {
    if (cmd->count(flag)) pidma::apply_config_kv(cfg, key, value);
  };
  maybe("--users", "users", f.users);
  maybe("--N", "N", f.N);
  maybe("--k", "k", f.k);
  maybe("--rc", "rc", f.rc);
  maybe("--dr", "dr", f.dr);
  maybe("--ebn0", "ebn0", f.ebn0);
  maybe("--trials", "trials", f.trials);
  maybe("--max-block-errors", "max_block_errors", f.max_block_errors);
  maybe("--it-mud", "it_mud", f.it_mud);
  maybe("--it-bp", "it_bp", f.it_bp);
  maybe("--reset-fg", "reset_fg", f.reset_fg);
  maybe("--stop", "stop", f.stop);
  maybe("--q", "q", f.q);
  maybe("--seed", "seed", f.seed);
  maybe("--design", "design", f.design);
  maybe("--feedback", "feedback", f.feedback);
  maybe("--phases", "phases", f.phases);
  maybe("--powers", "powers", f.powers);
  maybe("--threads", "threads", f.threads);
  maybe("--out", "out", f.out);

  // Reset decoding wants enough BP iterations to converge; keep the paired
  // defaults (off, 2) / (on, 20) unless it_bp was given explicitly.
  if (cfg.rx.reset_fg && !cmd->count("--it-bp") && cfg.rx.n_it_bp == 2) cfg.rx.n_it_bp = 20;
  return cfg;
}

std::unique_ptr<std::ofstream> open_out(const std::string& path, std::ostream*& os) {
  if (path.empty() || path == "-") {
    os = &std::cout;
    return nullptr;
  }
  auto file = std::make_unique<std::ofstream>(path);
  if (!*file) throw std::runtime_error("cannot open output file " + path);
  os = file.get();
  return file;
}

void write_meta(const SimConfig& cfg, const std::string& csv_path) {
  if (csv_path.empty() || csv_path == "-") return;
  std::ofstream meta(csv_path + ".meta");
  meta << canonical_config(cfg) << "digest=" << pidma::config_digest(cfg) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polar-coded IDMA link-level simulator"};
  app.require_subcommand(1);

  CommonFlags sweep_flags, ablate_flags, fcc_flags, equiv_flags;

  CLI::App* sweep = app.add_subcommand("sweep", "run a BLER/BER Eb/N0 sweep");
  add_common(sweep, sweep_flags);

  CLI::App* ablate = app.add_subcommand("ablate-reset",
                                        "paired sweep: reset vs persistent factor graph");
  add_common(ablate, ablate_flags);
  int reset_iters = 20, persist_iters = 2;
  ablate->add_option("--reset-iters", reset_iters, "BP iterations for the reset variant");
  ablate->add_option("--persist-iters", persist_iters, "BP iterations for the persistent variant");

  CLI::App* fcc = app.add_subcommand("fcc", "emit a frozen channel chart");
  add_common(fcc, fcc_flags);
  int fcc_width = 0, fcc_height = 0;
  std::string fcc_pgm;
  fcc->add_option("--width", fcc_width, "chart width (width*height = N)")->required();
  fcc->add_option("--height", fcc_height, "chart height")->required();
  fcc->add_option("--pgm", fcc_pgm, "also write a P2 portable graymap");

  CLI::App* equiv = app.add_subcommand("equiv",
                                       "verify repetition / equivalent-code identity");
  add_common(equiv, equiv_flags);

  try {
    app.parse(argc, argv);

    if (sweep->parsed()) {
      const SimConfig cfg = build_config(sweep, sweep_flags);
      std::ostream* os = nullptr;
      auto file = open_out(cfg.out_path, os);
      run_sweep(cfg, os);
      write_meta(cfg, cfg.out_path);
      return 0;
    }

    if (ablate->parsed()) {
      SimConfig cfg = build_config(ablate, ablate_flags);
      const std::string base = cfg.out_path.empty() || cfg.out_path == "-"
                                   ? std::string("ablate")
                                   : cfg.out_path;
      std::ofstream reset_csv(base + "_reset.csv");
      std::ofstream persist_csv(base + "_persist.csv");
      if (!reset_csv || !persist_csv)
        throw std::runtime_error("cannot open ablation output files at " + base);
      run_reset_ablation(cfg, reset_iters, persist_iters, &reset_csv, &persist_csv);
      write_meta(cfg, base + "_reset.csv");
      std::cout << "wrote " << base << "_reset.csv and " << base << "_persist.csv\n";
      return 0;
    }

    if (fcc->parsed()) {
      const SimConfig cfg = build_config(fcc, fcc_flags);
      auto [A, order] = pidma::build_design(cfg.design, cfg.N, cfg.k);
      // --dr >= 2 charts the equivalent long code of the polar + repetition
      // concatenation. The chart axis is always the Bhattacharyya ranking.
      if (cfg.d_r > 1) A = build_equivalent_code(A, cfg.d_r);
      const pidma::ReliabilityOrder axis =
          pidma::bhattacharyya_order(A.N, cfg.design.z0);
      std::ostream* os = nullptr;
      auto file = open_out(cfg.out_path, os);
      emit_fcc(A, axis, fcc_width, fcc_height, *os);
      if (!fcc_pgm.empty()) {
        std::ofstream pgm(fcc_pgm);
        if (!pgm) throw std::runtime_error("cannot open " + fcc_pgm);
        emit_fcc_pgm(A, axis, fcc_width, fcc_height, pgm);
      }
      return 0;
    }

    if (equiv->parsed()) {
      const SimConfig cfg = build_config(equiv, equiv_flags);
      const pidma::EquivReport report =
          pidma::verify_equivalence(cfg.N, cfg.k, cfg.d_r, cfg.design);
      std::cout << "equivalence N=" << cfg.N << " k=" << cfg.k << " dr=" << cfg.d_r << ": "
                << (report.pass ? "pass" : "FAIL") << ", " << report.messages_checked
                << (report.exhaustive ? " messages (exhaustive)" : " messages (sampled)")
                << "\n";
      if (!report.pass) {
        std::cout << "counterexample u = " << report.counterexample << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
