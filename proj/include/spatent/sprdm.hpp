#pragma once

// Single-particle reduced density matrix of the two-boson eigenstates and of
// their canonical thermal mixture,
//
//   rho1_{n,nu}(x, x') = int Psi_{n,nu}(x, y) Psi_{n,nu}(x', y) dy,
//   rho1(x, x')        = sum P_{n,nu} rho1_{n,nu}(x, x'),
//
// normalised to unit trace.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spatent/twoboson.hpp"

namespace spatent::sprdm {

using twoboson::EigenPair;

struct ThermalTerm {
  EigenPair pair;
  double weight = 1.0;
};

struct CutoffReport {
  std::size_t included = 1;
  /// Largest E_total - E_0 admitted by the Boltzmann criterion.
  double energy_window = 0.0;
  /// Upper bound on the Boltzmann weight of all omitted states.
  double residual_bound = 0.0;
};

struct ThermalEnsemble {
  double T = 0.0;
  std::vector<ThermalTerm> terms;
  /// Partition function over the included states, with energies measured
  /// from the ground state: Z = sum exp(-(E - E_0) / T).
  double Z = 1.0;
  CutoffReport cutoff;
};

inline constexpr double kDefaultTailTolerance = 1e-8;

/// Boltzmann weights over a spectrum sorted by E_total. Every state with
/// exp(-(E - E_0)/T) >= tail_tol is kept and the weights renormalised.
/// Throws ConfigError if the spectrum ends before the cutoff is reached.
ThermalEnsemble thermal_weights(double T, std::span<const EigenPair> spectrum,
                                double tail_tol = kDefaultTailTolerance);

/// Solves as many relative levels as the cutoff needs, then thermal_weights.
ThermalEnsemble build_ensemble(const twoboson::Coupling& g, double T,
                               double tail_tol = kDefaultTailTolerance);

struct KernelOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
};

/// rho1_{n,nu}(x, x') by adaptive quadrature over [-X_max, X_max], with the
/// exchange cusps at y = x and y = x' used as breakpoints.
double sprdm_pure(const EigenPair& pair, double x, double xp, const KernelOptions& opt = {});

/// sum_k w_k rho1_k(x, x').
double sprdm_thermal(const ThermalEnsemble& ens, double x, double xp,
                     const KernelOptions& opt = {});

/// One-body kernel of a pure state or a thermal ensemble. Immutable after
/// construction; concurrent reads are safe.
class SprdmEvaluator {
public:
  explicit SprdmEvaluator(const EigenPair& pure, KernelOptions opt = {});
  explicit SprdmEvaluator(ThermalEnsemble ensemble, KernelOptions opt = {});

  [[nodiscard]] double operator()(double x, double xp) const;
  [[nodiscard]] double diagonal(double x) const { return (*this)(x, x); }

  [[nodiscard]] const ThermalEnsemble& ensemble() const { return ensemble_; }
  [[nodiscard]] std::span<const ThermalTerm> terms() const { return ensemble_.terms; }
  [[nodiscard]] bool is_pure() const { return pure_; }
  [[nodiscard]] double temperature() const { return ensemble_.T; }
  /// Largest integration half-width over all terms.
  [[nodiscard]] double extent() const;
  [[nodiscard]] const KernelOptions& options() const { return opt_; }

  /// int rho1(x, x) dx by adaptive quadrature of the pointwise diagonal.
  [[nodiscard]] double trace(double tol = 1e-9) const;

private:
  ThermalEnsemble ensemble_;
  KernelOptions opt_;
  bool pure_ = false;
};

/// G(i, j) = rho1(grid[i], grid[j]), each unordered pair evaluated once.
/// Throws DomainError unless the grid is strictly increasing.
Eigen::MatrixXd sprdm_grid(const SprdmEvaluator& kernel, std::span<const double> grid);

/// Trapezoid weights for a strictly increasing grid.
Eigen::VectorXd trapezoid_weights(std::span<const double> grid);

} // namespace spatent::sprdm
