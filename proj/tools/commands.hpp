#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "spatent/modes.hpp"
#include "spatent/twoboson.hpp"

namespace spatent::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitOracle = 4;

inline constexpr int kMaxScanModes = 12;

/// One run of any subcommand. Fields irrelevant to a command are ignored.
struct RunConfig {
  std::vector<twoboson::Coupling> couplings;
  std::vector<double> temperatures;
  double half_length = 2.0;
  std::vector<double> central_lengths{4.0, 2.8, 1.4};
  std::string modes;           ///< mode-set literal, see parse_modes
  double threshold = modes::kDefaultThreshold;
  double tol = 1e-10;          ///< per-state correlator tolerance
  double truncation = modes::kDefaultTruncation;
  int count = 3;
  int trials = 200;
  int max_particles = 4;
  int grid_resolution = 4;
  std::uint64_t seed = 12345;
};

/// Sweep defaults for each subcommand, applied where a list was left empty.
RunConfig with_defaults(RunConfig cfg, const std::string& command);

/// Comma-separated couplings; "inf" selects the hard-core limit.
std::vector<twoboson::Coupling> parse_couplings(const std::vector<std::string>& items);
std::vector<double> parse_reals(const std::vector<std::string>& items, const char* what);

/// Mode literal, items separated by ';' or whitespace:
///   lo:hi                 uniform weight
///   lo:hi:gauss:c:w       Gaussian weight centred at c with width w
///   split:lo:hi:M         M equal uniform modes tiling [lo, hi]
/// Endpoints accept -inf / inf.
modes::ModeSet parse_modes(const std::string& text, double truncation);

void cmd_energies(const RunConfig& cfg, std::ostream& out);
void cmd_bimode_sweep(const RunConfig& cfg, std::ostream& out);
void cmd_trimode_sweep(const RunConfig& cfg, std::ostream& out);
/// Returns false when any cell falls short of full multi-mode entanglement.
bool cmd_multimode_scan(const RunConfig& cfg, std::ostream& out);
/// Throws IdentityViolation after writing the report if any check fails.
void cmd_oracle(const RunConfig& cfg, std::ostream& out);

/// Runs jobs 0..count-1 on a worker pool; results come back in index order
/// and the lowest-index failure is rethrown.
void run_indexed(std::size_t count, const std::function<void(std::size_t)>& job);

/// Shortest round-trip decimal (17 significant digits at most).
std::string format_real(double v);

/// Maps library exceptions to exit codes; writes the message to err.
int exit_code_for(const std::exception& e);

} // namespace spatent::cli
