#include "spatent/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spatent/error.hpp"

namespace spatent::fock {
namespace {

constexpr double kNormSlack = 1e-10;

void check_particles(int N) {
  if (N < 0 || N > kMaxParticles) {
    std::ostringstream os;
    os << "particle number " << N << " outside [0, " << kMaxParticles << "]";
    throw ConfigError(os.str());
  }
}

using cld = std::complex<long double>;

// binom[n][k] for n <= kMaxParticles
const auto& binomials() {
  static const auto table = [] {
    std::vector<std::vector<long double>> t(kMaxParticles + 1);
    for (int n = 0; n <= kMaxParticles; ++n) {
      t[n].assign(static_cast<std::size_t>(n + 1), 1.0L);
      for (int k = 1; k < n; ++k) t[n][k] = t[n - 1][k - 1] + t[n - 1][k];
    }
    return t;
  }();
  return table;
}

long double factorial(int n) {
  long double f = 1.0L;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Amplitudes over |k, N-k>_{cd} of the state |n, N-n>_{ab}, with
// a^dag = (c^dag + d^dag)/sqrt2 and b^dag = e^{i phase}(c^dag - d^dag)/sqrt2.
std::vector<cld> transform_number_state(int N, int n, long double phase) {
  const int m = N - n;
  const auto& C = binomials();
  // (c + d)^n (c - d)^m as a polynomial in c with d filling the rest
  std::vector<long double> poly(static_cast<std::size_t>(N + 1), 0.0L);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= m; ++j) {
      const long double sign = ((m - j) % 2 == 0) ? 1.0L : -1.0L;
      poly[static_cast<std::size_t>(i + j)] += C[n][i] * C[m][j] * sign;
    }
  const long double pref = std::pow(2.0L, -0.5L * N) / std::sqrt(factorial(n) * factorial(m));
  const cld rot = std::polar(1.0L, phase * m);
  std::vector<cld> out(static_cast<std::size_t>(N + 1));
  for (int k = 0; k <= N; ++k)
    out[static_cast<std::size_t>(k)] =
        rot * (pref * poly[static_cast<std::size_t>(k)] * std::sqrt(factorial(k) * factorial(N - k)));
  return out;
}

} // namespace

TwoModeFockState TwoModeFockState::pure(int N, Eigen::VectorXcd amplitudes) {
  return mixture(N, {PureComponent{1.0, std::move(amplitudes)}});
}

TwoModeFockState TwoModeFockState::mixture(int N, std::vector<PureComponent> components) {
  check_particles(N);
  if (components.empty()) throw ConfigError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.amplitudes.size() != N + 1)
      throw ConfigError("component dimension does not match N + 1 = " + std::to_string(N + 1));
    if (!(c.probability >= 0.0)) throw ConfigError("mixture probabilities must be >= 0");
    if (std::abs(c.amplitudes.squaredNorm() - 1.0) > kNormSlack)
      throw ConfigError("component amplitudes are not normalised");
    total += c.probability;
  }
  if (std::abs(total - 1.0) > kNormSlack) throw ConfigError("mixture probabilities must sum to 1");
  TwoModeFockState s;
  s.N_ = N;
  s.components_ = std::move(components);
  return s;
}

TwoModeFockState TwoModeFockState::number_state(int N, int n) {
  check_particles(N);
  if (n < 0 || n > N) throw ConfigError("occupation outside [0, N]");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N + 1);
  v(n) = 1.0;
  return pure(N, std::move(v));
}

TwoModeFockState separable_state(int N, std::span<const double> p) {
  check_particles(N);
  if (p.size() != static_cast<std::size_t>(N + 1))
    throw ConfigError("separable_state: need N + 1 probabilities");
  std::vector<PureComponent> comps;
  for (int n = 0; n <= N; ++n) {
    const double pn = p[static_cast<std::size_t>(n)];
    if (!(pn >= 0.0) || !std::isfinite(pn))
      throw ConfigError("separable_state: probabilities must be finite and >= 0");
    if (pn == 0.0) continue;
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N + 1);
    v(n) = 1.0;
    comps.push_back({pn, std::move(v)});
  }
  if (comps.empty()) throw ConfigError("separable_state: probabilities sum to 0");
  return TwoModeFockState::mixture(N, std::move(comps));
}

std::complex<double> eps_two_mode(const TwoModeFockState& state) {
  const int N = state.particles();
  std::complex<double> sum = 0.0;
  for (const auto& c : state.components()) {
    std::complex<double> e = 0.0;
    // a^dag b |n, N-n> = sqrt((n+1)(N-n)) |n+1, N-n-1>
    for (int n = 0; n < N; ++n)
      e += std::conj(c.amplitudes(n + 1)) * c.amplitudes(n) * std::sqrt((n + 1.0) * (N - n));
    sum += c.probability * e;
  }
  return sum;
}

PortCounts beamsplitter_counts(const TwoModeFockState& state, double phase) {
  const int N = state.particles();
  std::vector<std::vector<cld>> images;
  images.reserve(static_cast<std::size_t>(N + 1));
  for (int n = 0; n <= N; ++n) images.push_back(transform_number_state(N, n, phase));

  long double nc = 0.0L;
  for (const auto& c : state.components()) {
    std::vector<cld> out(static_cast<std::size_t>(N + 1), cld(0.0L));
    for (int n = 0; n <= N; ++n) {
      const cld amp(c.amplitudes(n).real(), c.amplitudes(n).imag());
      if (amp == cld(0.0L)) continue;
      for (int k = 0; k <= N; ++k)
        out[static_cast<std::size_t>(k)] += amp * images[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }
    long double mean = 0.0L;
    for (int k = 0; k <= N; ++k) mean += k * std::norm(out[static_cast<std::size_t>(k)]);
    nc += static_cast<long double>(c.probability) * mean;
  }
  PortCounts pc;
  pc.n_c = static_cast<double>(nc);
  pc.n_d = static_cast<double>(static_cast<long double>(N) - nc);
  return pc;
}

IdentityReport verify_identity(const TwoModeFockState& state, double tolerance, int phase_samples) {
  IdentityReport rep;
  const auto eps = eps_two_mode(state);
  rep.twice_eps = 2.0 * std::abs(eps);
  rep.best_phase = eps == 0.0 ? 0.0 : -std::arg(eps);
  rep.max_difference = std::abs(beamsplitter_counts(state, rep.best_phase).difference());
  for (int s = 0; s < phase_samples; ++s) {
    const double phi = 2.0 * std::numbers::pi * s / phase_samples;
    const double d = std::abs(beamsplitter_counts(state, phi).difference());
    if (d > rep.max_difference) {
      rep.max_difference = d;
      rep.best_phase = phi;
    }
  }
  rep.deviation = std::abs(rep.max_difference - rep.twice_eps);
  rep.holds = rep.deviation <= tolerance;
  return rep;
}

std::vector<std::vector<double>> probability_grid(int N, int resolution) {
  check_particles(N);
  if (resolution < 1) throw ConfigError("probability_grid: resolution must be >= 1");
  std::vector<std::vector<double>> out;
  std::vector<int> parts(static_cast<std::size_t>(N + 1), 0);
  // compositions of `resolution` into N + 1 nonnegative parts
  const auto recurse = [&](auto&& self, int slot, int left) -> void {
    if (slot == N) {
      parts[static_cast<std::size_t>(slot)] = left;
      std::vector<double> p(parts.size());
      for (std::size_t i = 0; i < parts.size(); ++i)
        p[i] = static_cast<double>(parts[i]) / resolution;
      out.push_back(std::move(p));
      return;
    }
    for (int k = left; k >= 0; --k) {
      parts[static_cast<std::size_t>(slot)] = k;
      self(self, slot + 1, left - k);
    }
  };
  recurse(recurse, 0, resolution);
  return out;
}

} // namespace spatent::fock
