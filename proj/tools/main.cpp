#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "spatent/error.hpp"

using namespace spatent;

int main(int argc, char** argv) {
  CLI::App app{"Spatial mode entanglement of a trapped boson pair"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; command-line flags take precedence");

  std::vector<std::string> g_single, g_list, T_list, Lb_list;
  cli::RunConfig cfg;
  std::string out_path;
  app.add_option("--g", g_single, "single coupling (number or inf)");
  app.add_option("--g-list", g_list, "comma-separated couplings")->delimiter(',');
  app.add_option("--T-list", T_list, "comma-separated temperatures")->delimiter(',');
  app.add_option("--L", cfg.half_length, "bimode half-length: modes [-L,0] and [0,L]");
  app.add_option("--Lb-list", Lb_list, "central mode lengths for trimode-sweep")->delimiter(',');
  app.add_option("--modes", cfg.modes, "mode literal: 'lo:hi;...', 'lo:hi:gauss:c:w', 'split:lo:hi:M'");
  app.add_option("--threshold", cfg.threshold, "nonzero threshold for multimode-scan");
  app.add_option("--tol", cfg.tol, "absolute tolerance of each correlator entry");
  app.add_option("--truncation", cfg.truncation, "half-width at which infinite modes are cut");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--seed", cfg.seed, "random seed for oracle");
  app.add_option("--count", cfg.count, "number of relative levels for energies");
  app.add_option("--trials", cfg.trials, "random pure states for oracle");
  app.add_option("--N-max", cfg.max_particles, "largest particle number for oracle");

  const char* names[] = {"energies", "bimode-sweep", "trimode-sweep", "multimode-scan", "oracle"};
  const char* help[] = {"relative energies and residuals", "two-mode witness against temperature",
                        "three-mode witness against coupling", "bipartition scan of M modes",
                        "Fock-space beamsplitter identity check"};
  for (int i = 0; i < 5; ++i) app.add_subcommand(names[i], help[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (!g_single.empty()) cfg.couplings = cli::parse_couplings(g_single);
    if (!g_list.empty()) {
      const auto more = cli::parse_couplings(g_list);
      cfg.couplings.insert(cfg.couplings.end(), more.begin(), more.end());
    }
    cfg.temperatures = cli::parse_reals(T_list, "temperature");
    if (!Lb_list.empty()) cfg.central_lengths = cli::parse_reals(Lb_list, "central length");
    cfg = cli::with_defaults(std::move(cfg), command);

    std::ostringstream buffer;
    int rc = cli::kExitOk;
    std::exception_ptr failure;
    try {
      if (command == "energies")
        cli::cmd_energies(cfg, buffer);
      else if (command == "bimode-sweep")
        cli::cmd_bimode_sweep(cfg, buffer);
      else if (command == "trimode-sweep")
        cli::cmd_trimode_sweep(cfg, buffer);
      else if (command == "multimode-scan")
        cli::cmd_multimode_scan(cfg, buffer);
      else
        cli::cmd_oracle(cfg, buffer);
    } catch (const spatent::IdentityViolation&) {
      // the report is still written
      failure = std::current_exception();
    }
    if (out_path.empty()) {
      std::cout << buffer.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw spatent::ConfigError("cannot open output file '" + out_path + "'");
      f << buffer.str();
    }
    if (failure) std::rethrow_exception(failure);
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
