#pragma once

// Spatial modes, the mode-coherence witness
//
//   eps_ab = int_a dx int_b dx' g_a(x) g_b*(x') rho1(x, x'),
//
// its block generalisation, and the multi-mode bipartition scan.

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "spatent/sprdm.hpp"

namespace spatent::modes {

/// Half-width at which infinite mode intervals are cut. Matches the
/// quadrature extent sqrt(2E) + 6 of the highest zero-temperature ground
/// state (Tonks limit, E = 2).
inline constexpr double kDefaultTruncation = 8.0;

struct Uniform {};
struct Gaussian {
  double center = 0.0;
  double width = 1.0;
};
/// Piecewise-linear profile through (x[i], values[i]), zero outside.
struct Tabulated {
  std::vector<double> x;
  std::vector<double> values;
};
using Weight = std::variant<Uniform, Gaussian, Tabulated>;

/// An interval with a weight g(x) normalised to int |g|^2 = 1 over it.
class SpatialMode {
public:
  /// Infinite endpoints are cut at +-truncation. Throws ConfigError for an
  /// empty interval or a weight that cannot be normalised.
  SpatialMode(double lo, double hi, Weight weight = Uniform{},
              double truncation = kDefaultTruncation);

  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }
  [[nodiscard]] double length() const { return hi_ - lo_; }
  [[nodiscard]] const Weight& weight() const { return weight_; }

  /// Normalised g(x); zero outside [lo, hi].
  [[nodiscard]] double operator()(double x) const;
  /// Points where g has a kink or jump (always includes lo and hi).
  [[nodiscard]] std::vector<double> breakpoints() const;
  [[nodiscard]] std::string describe() const;

private:
  double lo_;
  double hi_;
  Weight weight_;
  double scale_ = 1.0;
};

/// Pairwise-disjoint modes (shared endpoints allowed).
class ModeSet {
public:
  ModeSet() = default;
  explicit ModeSet(std::vector<SpatialMode> modes);

  [[nodiscard]] std::size_t size() const { return modes_.size(); }
  [[nodiscard]] const SpatialMode& operator[](std::size_t i) const { return modes_[i]; }
  [[nodiscard]] auto begin() const { return modes_.begin(); }
  [[nodiscard]] auto end() const { return modes_.end(); }
  [[nodiscard]] std::string describe() const;

  /// M equal-length uniform modes tiling [lo, hi].
  static ModeSet equal_split(double lo, double hi, int count,
                             double truncation = kDefaultTruncation);
  /// Two modes [-L, 0] and [0, L].
  static ModeSet symmetric_pair(double half_length);
  /// (-inf, -Lb/2), (-Lb/2, Lb/2), (Lb/2, inf).
  static ModeSet three_mode(double central_length, double truncation = kDefaultTruncation);

private:
  std::vector<SpatialMode> modes_;
};

struct CorrelatorMatrix {
  Eigen::MatrixXcd M;
  double quad_error = 0.0; ///< bound on the absolute error of each entry
  std::string coupling;
  double T = 0.0;
  std::string modes;
  std::size_t states = 1; ///< thermal terms summed
  double residual_weight = 0.0;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(M.rows()); }
};

/// Per-eigenstate contribution int F_i(y) F_j(y) dy, F_i(y) = int g_i(x) Psi(x, y) dx.
struct StateCorrelator {
  Eigen::MatrixXd M;
  double error = 0.0;
};

struct CorrelatorOptions {
  double abs_tol = 1e-10; ///< per-state outer tolerance
  double inner_tol = 1e-12;
};

StateCorrelator state_correlator(const ModeSet& modes, const twoboson::EigenPair& pair,
                                 const CorrelatorOptions& opt = {});

/// Memoises per-state correlators for one mode set; thread-safe.
class StateCorrelatorCache {
public:
  explicit StateCorrelatorCache(ModeSet modes, CorrelatorOptions opt = {})
      : modes_(std::move(modes)), opt_(opt) {}

  [[nodiscard]] const ModeSet& modes() const { return modes_; }
  /// Keyed by (coupling, n, nu).
  StateCorrelator get(const std::string& coupling, const twoboson::EigenPair& pair);

private:
  ModeSet modes_;
  CorrelatorOptions opt_;
  std::mutex mutex_;
  std::map<std::tuple<std::string, int, int>, StateCorrelator> cache_;
};

/// M_ij = tr[psi_i^dag psi_j rho] for every pair of modes.
CorrelatorMatrix correlator_matrix(const ModeSet& modes, const sprdm::SprdmEvaluator& kernel,
                                   const CorrelatorOptions& opt = {});
/// Same, reusing cached per-state contributions; `coupling` keys the cache.
CorrelatorMatrix correlator_matrix(StateCorrelatorCache& cache,
                                   const sprdm::SprdmEvaluator& kernel,
                                   const std::string& coupling);

/// Arbitrary pointwise kernel rho(x, x'), integrated directly over each pair
/// of mode rectangles. `kinks` lists points where rho is not smooth in either
/// argument; the diagonal x = x' is always treated as one.
using KernelFunction = std::function<double(double, double)>;
CorrelatorMatrix correlator_matrix(const ModeSet& modes, const KernelFunction& kernel,
                                   std::span<const double> kinks = {},
                                   const CorrelatorOptions& opt = {});

/// eps_ab for two disjoint modes. Throws ConfigError on overlap.
std::complex<double> epsilon_pair(const SpatialMode& a, const SpatialMode& b,
                                  const sprdm::SprdmEvaluator& kernel,
                                  const CorrelatorOptions& opt = {});

struct Block {
  std::vector<std::size_t> members;
  std::vector<std::complex<double>> coefficients;

  /// Equal real coefficients 1/sqrt(|members|).
  static Block uniform(std::vector<std::size_t> members);
};

/// eps_AB = sum_{i in A, j in B} c_i c_j^* M_ij.
std::complex<double> block_epsilon(const Block& A, const Block& B, const CorrelatorMatrix& M);

/// Largest singular value of the A x B sub-block: sup over unit coefficients of |eps_AB|.
double max_block_epsilon(std::span<const std::size_t> A, std::span<const std::size_t> B,
                         const CorrelatorMatrix& M);

struct Bipartition {
  std::vector<std::size_t> A; ///< always contains mode 0
  std::vector<std::size_t> B;
};

inline constexpr int kMaxBipartitionModes = 20;

/// All 2^(M-1) - 1 unordered divisions of modes 0..M-1 into two nonempty blocks.
std::vector<Bipartition> enumerate_bipartitions(int mode_count);

enum class Verdict { FullyEntangled, NotFullyEntangled };

struct BipartitionValue {
  Bipartition split;
  double value = 0.0;  ///< sigma_max(M[A, B])
  double margin = 0.0; ///< value - threshold
};

struct SeparabilityReport {
  Verdict verdict = Verdict::NotFullyEntangled;
  double threshold = 0.0;
  std::vector<BipartitionValue> values;
  std::vector<std::size_t> vanishing; ///< indices into values with value <= threshold
  /// Connected components of the graph |M_ij| > threshold. Any p-separable
  /// structure compatible with the data groups whole components together;
  /// the witness cannot certify that such a decomposition exists.
  std::vector<std::vector<std::size_t>> coherence_components;
  double min_value = 0.0;
};

inline constexpr double kDefaultThreshold = 1e-6;

SeparabilityReport classify_separability(const CorrelatorMatrix& M,
                                         double threshold = kDefaultThreshold);
SeparabilityReport classify_separability(const ModeSet& modes,
                                         const sprdm::SprdmEvaluator& kernel,
                                         double threshold = kDefaultThreshold);

std::string to_string(Verdict v);

} // namespace spatent::modes
