#pragma once

// Reference computations used only by the tests. They avoid the library's
// special functions and quadrature so that agreement is meaningful.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Normalised oscillator eigenfunction from the unnormalised Hermite
/// recurrence and an explicit factorial.
inline double hermite_function(int n, double x) {
  double h0 = 1.0, h1 = 2.0 * x;
  double h = n == 0 ? h0 : h1;
  for (int k = 1; k < n; ++k) {
    h = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h;
  }
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  return h * std::exp(-0.5 * x * x) / std::sqrt(std::pow(2.0, n) * fact * std::sqrt(std::numbers::pi));
}

/// One-body kernel of two non-interacting bosons in thermal equilibrium,
/// summed over symmetrised product states |k, l>, k <= l, with E = k + l + 1.
inline double ideal_pair_kernel(double T, double x, double xp, int levels = 40) {
  double Z = 0.0, s = 0.0;
  for (int k = 0; k < levels; ++k)
    for (int l = k; l < levels; ++l) {
      const double w = T == 0.0 ? (k + l == 0 ? 1.0 : 0.0) : std::exp(-(k + l) / T);
      if (w == 0.0) continue;
      Z += w;
      const double a = hermite_function(k, x) * hermite_function(k, xp);
      const double b = hermite_function(l, x) * hermite_function(l, xp);
      s += w * (k == l ? a : 0.5 * (a + b));
    }
  return s / Z;
}

/// Composite Gauss-Legendre (10 points per panel) on [a, b].
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             int panels) {
  static constexpr double xs[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                   0.8650633666889845, 0.9739065285171717};
  static constexpr double ws[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                   0.1494513491505806, 0.0666713443086881};
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 5; ++i)
      sum += ws[i] * (f(mid - 0.5 * h * xs[i]) + f(mid + 0.5 * h * xs[i]));
  }
  return 0.5 * h * sum;
}

} // namespace oracle
