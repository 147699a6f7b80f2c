#pragma once

// Two harmonically trapped bosons with a contact interaction, solved in
// centre-of-mass / relative coordinates
//
//   X = (x1 + x2) / sqrt(2),   x = (x1 - x2) / sqrt(2),
//
// (unit Jacobian, so both factors are unit oscillators and normalisation
// factorises). Relative energies are the roots of
//
//   -g = 2 Γ(-E/2 + 3/4) / Γ(-E/2 + 1/4),
//
// one per interval (1/2 + 2k, 3/2 + 2k). Index nu = 0, 1, 2, ... counts the
// even relative states consecutively.

#include <memory>
#include <string>
#include <span>
#include <string_view>
#include <vector>

namespace spatent::twoboson {

/// Dimensionless 1-D coupling in oscillator units, or the Tonks-Girardeau
/// marker for impenetrable bosons.
class Coupling {
public:
  Coupling() = default;
  /// Throws DomainError for negative or non-finite g.
  static Coupling finite(double g);
  static Coupling infinite();
  /// Accepts decimal literals and "inf" / "infinity" (case-insensitive).
  static Coupling parse(std::string_view text);

  [[nodiscard]] bool is_infinite() const { return infinite_; }
  /// Only meaningful for finite couplings.
  [[nodiscard]] double value() const { return value_; }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const Coupling&, const Coupling&) = default;

private:
  double value_ = 0.0;
  bool infinite_ = false;
};

inline constexpr double kConfinementConstant = 1.4603;

/// g_1D = a_3d / (a_perp (a_perp - C a_3d)) with hbar = m = 1. Signed; throws
/// DomainError at the confinement-induced resonance a_perp = C a_3d or for
/// a_perp <= 0.
double g1d_from_scattering(double a_3d, double a_perp);

/// Lowest `count` even-sector relative energies. Finite couplings are solved
/// by bisection to width 1e-3 followed by a bracketed TOMS 748 refinement, in
/// the variable delta = (3/2 + 2k) - E so precision survives next to the pole.
std::vector<double> solve_relative_energies(const Coupling& g, int count);

/// Quadrature truncation for a state of energy E: classical turning point + 6.
double quadrature_extent(double energy);

/// e^{-x^2/2} U(1/4 - E/2, 1/2, x^2), not normalised.
double relative_wavefunction(double E_rel, double x);

/// Normalisation constant N with int |N psi_rel|^2 dx = 1 (adaptive quadrature
/// over [-X_max, X_max]).
double normalize_relative(double E_rel);

/// Normalised oscillator eigenfunction pi^{-1/4} (2^n n!)^{-1/2} H_n(X) e^{-X^2/2}.
double com_wavefunction(int n, double X);
/// out[k] = com_wavefunction(k, X) for k = 0..out.size()-1, from one recurrence.
void com_wavefunctions(double X, std::span<double> out);

/// Normalisation constant of the centre-of-mass factor, (2^n n! sqrt(pi))^{-1/2}.
double com_norm(int n);

/// Normalised relative eigenfunction, tabulated on |x| <= extent by piecewise
/// Chebyshev interpolation. Immutable and safe for concurrent reads.
class RelativeState {
public:
  RelativeState(int index, double energy);

  [[nodiscard]] int index() const { return index_; }
  [[nodiscard]] double energy() const { return energy_; }
  [[nodiscard]] double norm() const { return norm_; }
  /// Largest |x| covered by the table; beyond it the function is evaluated directly.
  [[nodiscard]] double table_extent() const { return extent_; }

  /// Normalised psi_rel(x); even in x.
  [[nodiscard]] double operator()(double x) const;
  /// Direct evaluation through tricomi_u, bypassing the table.
  [[nodiscard]] double exact(double x) const;

private:
  int index_;
  double energy_;
  double norm_;
  double extent_;
  double panel_width_;
  int degree_;
  std::vector<double> coeffs_; // panels * (degree + 1) Chebyshev coefficients
};

/// One symmetric two-body eigenstate Psi_{n,nu}(x1, x2) = psi_n(X) psi_nu(x).
struct EigenPair {
  int n = 0;
  int nu = 0;
  double E_com = 0.5;
  double E_rel = 0.5;
  double E_total = 1.0;
  double norm_com = 0.0;
  double norm_rel = 0.0;
  std::shared_ptr<const RelativeState> relative;

  [[nodiscard]] double com(double X) const { return com_wavefunction(n, X); }
  [[nodiscard]] double rel(double x) const { return (*relative)(x); }
  /// Half-width of the integration window for this state.
  [[nodiscard]] double extent() const { return quadrature_extent(E_total); }
};

/// Builds EigenPairs for one coupling, sharing the relative factor between
/// all centre-of-mass excitations.
class Spectrum {
public:
  Spectrum(Coupling g, int relative_count);
  /// Enough relative levels to enumerate every state with E_total <= e_max.
  static Spectrum covering(Coupling g, double e_max);

  [[nodiscard]] const Coupling& coupling() const { return g_; }
  [[nodiscard]] int relative_count() const { return static_cast<int>(relative_.size()); }
  [[nodiscard]] const std::vector<double>& relative_energies() const { return energies_; }
  [[nodiscard]] EigenPair pair(int n, int nu) const;
  [[nodiscard]] EigenPair ground() const { return pair(0, 0); }

  /// Every (n, nu) with E_total <= e_max, sorted by energy. Throws
  /// ConfigError if e_max reaches beyond the solved relative levels.
  [[nodiscard]] std::vector<EigenPair> states_below(double e_max) const;

private:
  Coupling g_;
  std::vector<double> energies_;
  std::vector<std::shared_ptr<const RelativeState>> relative_;
};

/// Psi_{n,nu}(x1, x2); symmetric under exchange.
double two_body_psi(const EigenPair& pair, double x1, double x2);

} // namespace spatent::twoboson
