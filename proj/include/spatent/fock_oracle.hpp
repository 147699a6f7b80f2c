#pragma once

// Two-mode Fock-space model of the beamsplitter measurement. States live in
// the fixed-N sector spanned by |n, N - n>, n = 0..N.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spatent::fock {

inline constexpr int kMaxParticles = 12;
inline constexpr double kIdentityTolerance = 1e-12;

struct PureComponent {
  double probability = 1.0;
  Eigen::VectorXcd amplitudes; ///< index n = occupation of mode a
};

class TwoModeFockState {
public:
  /// Throws ConfigError unless amplitudes has N + 1 entries with unit norm.
  static TwoModeFockState pure(int N, Eigen::VectorXcd amplitudes);
  /// Components must share N; probabilities nonnegative and summing to 1.
  static TwoModeFockState mixture(int N, std::vector<PureComponent> components);
  /// |n, N - n>.
  static TwoModeFockState number_state(int N, int n);

  [[nodiscard]] int particles() const { return N_; }
  [[nodiscard]] std::span<const PureComponent> components() const { return components_; }
  [[nodiscard]] bool is_pure() const { return components_.size() == 1; }

private:
  int N_ = 0;
  std::vector<PureComponent> components_;
};

/// sum_n p_n |n, N-n><n, N-n|. Throws ConfigError for an invalid distribution.
TwoModeFockState separable_state(int N, std::span<const double> p);

/// <a^dag b>.
std::complex<double> eps_two_mode(const TwoModeFockState& state);

struct PortCounts {
  double n_c = 0.0;
  double n_d = 0.0;
  [[nodiscard]] double difference() const { return n_c - n_d; }
};

/// Mean counts behind a 50:50 splitter after a phase e^{i phase} on mode b,
/// c = (a + e^{i phase} b)/sqrt 2 and d = (a - e^{i phase} b)/sqrt 2. The
/// input is expanded in output-mode creation operators and the counts read
/// off the transformed Fock amplitudes.
PortCounts beamsplitter_counts(const TwoModeFockState& state, double phase);

struct IdentityReport {
  double max_difference = 0.0; ///< max over phase of |n_c - n_d|
  double best_phase = 0.0;
  double twice_eps = 0.0;      ///< 2 |<a^dag b>|
  double deviation = 0.0;
  bool holds = false;
};

/// Compares max_phase |n_c - n_d| against 2|<a^dag b>|. The maximum is taken
/// over a uniform phase grid plus the phase -arg<a^dag b>.
IdentityReport verify_identity(const TwoModeFockState& state,
                               double tolerance = kIdentityTolerance, int phase_samples = 64);

/// Complex Gaussian amplitudes, normalised. Deterministic for a given engine state.
template <class Engine>
TwoModeFockState random_pure_state(int N, Engine& engine);

/// Every distribution with entries k / resolution, k = 0..resolution.
std::vector<std::vector<double>> probability_grid(int N, int resolution);

} // namespace spatent::fock

#include <boost/random/normal_distribution.hpp>

namespace spatent::fock {

template <class Engine>
TwoModeFockState random_pure_state(int N, Engine& engine) {
  boost::random::normal_distribution<double> normal;
  Eigen::VectorXcd v(N + 1);
  for (int n = 0; n <= N; ++n) {
    const double re = normal(engine);
    const double im = normal(engine);
    v(n) = {re, im};
  }
  v /= v.norm();
  return TwoModeFockState::pure(N, std::move(v));
}

} // namespace spatent::fock
