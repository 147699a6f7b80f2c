#pragma once

// Special-function kernels for the trapped two-boson problem: signed
// log-Gamma, the Gamma ratio that fixes the relative energies, Tricomi's
// confluent hypergeometric U, and physicists' Hermite polynomials.

#include <cstddef>

namespace spatent::specfun {

/// ln|Γ(x)| together with the sign of Γ(x).
struct SignedLog {
  double log_abs = 0.0;
  int sign = 1;

  [[nodiscard]] double value() const;
};

/// Throws PoleError for x in {0, -1, -2, ...}.
SignedLog log_gamma(double x);

/// ln|Γ(-k + eps)| for integer k >= 0 and small eps != 0, evaluated through
/// the reflection formula so that eps keeps its full relative precision.
SignedLog log_gamma_near_pole(int k, double eps);

/// f(E) = 2 Γ(-E/2 + 3/4) / Γ(-E/2 + 1/4).
///
/// Zeros sit at E = 1/2 + 2k and poles at E = 3/2 + 2k (k = 0, 1, ...). Both
/// are recognised by index arithmetic: an exact zero is returned at the former
/// and PoleError is thrown at the latter.
double gamma_energy_ratio(double E);

/// f(3/2 + 2k - delta) for delta in (0, 2), without forming E explicitly.
/// Used by the root finder, where delta can be ~1e-7 at strong coupling.
double gamma_energy_ratio_below_pole(int k, double delta);

/// Result of a Tricomi U evaluation with its estimated absolute error.
struct TricomiValue {
  double value = 0.0;
  double error = 0.0;
  double scale = 0.0;      ///< magnitude of the summed contributions before cancellation
  bool asymptotic = false; ///< true if the large-z expansion was selected
};

/// U(a, b, z) for real a, non-integer b and z >= 0, with error estimate.
///
/// Small and moderate z use the connection to the two Kummer M solutions,
/// summed in extended precision (escalating to quad precision when the
/// cancellation between the two terms is severe). Large z uses the
/// asymptotic z^{-a} series truncated at its smallest term. Whichever route
/// reports the smaller error estimate is returned.
TricomiValue tricomi_u_detail(double a, double b, double z);

/// U(a, b, z). Throws DomainError for z < 0 or integer b, ConvergenceError if
/// no representation reaches a relative accuracy of 1e-9.
double tricomi_u(double a, double b, double z);

inline constexpr int kDefaultHermiteMaxOrder = 200;

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
double hermite(int n, double x, int max_order = kDefaultHermiteMaxOrder);

} // namespace spatent::specfun
