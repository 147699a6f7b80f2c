#include "spatent/twoboson.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "spatent/error.hpp"
#include "spatent/quadrature.hpp"
#include "spatent/specfun.hpp"

namespace spatent::twoboson {
namespace {

// brackets stay this far from the poles of the Gamma ratio
constexpr double kPoleOffset = 1e-9;
constexpr double kBisectionWidth = 1e-3;

// relative-state table layout
constexpr double kPanelWidth = 0.5;
constexpr int kChebyshevDegree = 20;
constexpr double kTableMargin = 9.0;

double solve_one(double g, int k) {
  // h(delta) = f(3/2 + 2k - delta) + g rises from -inf at delta -> 0 to g at delta = 1.
  const auto h = [&](double delta) {
    return specfun::gamma_energy_ratio_below_pole(k, delta) + g;
  };
  double lo = kPoleOffset;
  double hi = 1.0 - kPoleOffset;
  double h_lo = h(lo);
  double h_hi = h(hi);
  if (!(h_lo < 0.0 && h_hi > 0.0)) {
    std::ostringstream os;
    os << "relative energy for g = " << g << " not bracketed in E in (" << 0.5 + 2 * k << ", "
       << 1.5 + 2 * k << ")";
    throw ConvergenceError(os.str());
  }
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    const double h_mid = h(mid);
    if (h_mid == 0.0) return 1.5 + 2.0 * k - mid;
    if (h_mid < 0.0) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
      h_hi = h_mid;
    }
  }
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      h, lo, hi, h_lo, h_hi, boost::math::tools::eps_tolerance<double>(), max_iter);
  if (max_iter >= 200) {
    std::ostringstream os;
    os << "relative energy for g = " << g << " did not converge in bracket delta in (" << lo
       << ", " << hi << ")";
    throw ConvergenceError(os.str());
  }
  // prefer the endpoint with the smaller residual
  const double delta = std::abs(h(a)) <= std::abs(h(b)) ? a : b;
  return 1.5 + 2.0 * k - delta;
}

} // namespace

Coupling Coupling::finite(double g) {
  if (!std::isfinite(g) || g < 0.0) {
    std::ostringstream os;
    os << "coupling must be finite and >= 0, got " << g;
    throw DomainError(os.str());
  }
  Coupling c;
  c.value_ = g;
  return c;
}

Coupling Coupling::infinite() {
  Coupling c;
  c.infinite_ = true;
  c.value_ = std::numeric_limits<double>::infinity();
  return c;
}

Coupling Coupling::parse(std::string_view text) {
  std::string lower;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch)))
      lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (lower == "inf" || lower == "infinity" || lower == "+inf") return infinite();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(lower.data(), lower.data() + lower.size(), value);
  if (ec != std::errc() || ptr != lower.data() + lower.size() || lower.empty())
    throw ConfigError("cannot parse coupling '" + std::string(text) + "'");
  if (std::isinf(value)) return infinite();
  return finite(value);
}

std::string Coupling::to_string() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

double g1d_from_scattering(double a_3d, double a_perp) {
  if (!(a_perp > 0.0)) throw DomainError("g1d_from_scattering: a_perp must be > 0");
  const double gap = a_perp - kConfinementConstant * a_3d;
  if (gap == 0.0) {
    std::ostringstream os;
    os << "g1d_from_scattering: confinement-induced resonance at a_perp = C a_3d = " << a_perp;
    throw DomainError(os.str());
  }
  return a_3d / (a_perp * gap);
}

std::vector<double> solve_relative_energies(const Coupling& g, int count) {
  if (count < 1) throw DomainError("solve_relative_energies: count must be >= 1");
  std::vector<double> energies;
  energies.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    if (g.is_infinite())
      energies.push_back(1.5 + 2.0 * k);
    else if (g.value() == 0.0)
      energies.push_back(0.5 + 2.0 * k);
    else
      energies.push_back(solve_one(g.value(), k));
  }
  return energies;
}

double quadrature_extent(double energy) { return std::sqrt(2.0 * std::max(energy, 0.0)) + 6.0; }

double relative_wavefunction(double E_rel, double x) {
  const double z = x * x;
  return std::exp(-0.5 * z) * specfun::tricomi_u(0.25 - 0.5 * E_rel, 0.5, z);
}

double normalize_relative(double E_rel) {
  const double x_max = quadrature_extent(E_rel);
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-13;
  opt.max_panel = 1.0;
  const auto sq = [&](double x) {
    const double v = relative_wavefunction(E_rel, x);
    return v * v;
  };
  // the cusp sits at x = 0; integrate the even integrand on [0, x_max]
  const auto r = quad::integrate(sq, 0.0, x_max, opt);
  if (!(r.value > 0.0)) throw QuadratureError("normalize_relative: vanishing norm integral");
  return 1.0 / std::sqrt(2.0 * r.value);
}

double com_norm(int n) {
  if (n < 0) throw DomainError("com_norm: n must be >= 0");
  // log form avoids overflow of 2^n n!
  const double log_norm =
      -0.5 * (n * std::numbers::ln2 + std::lgamma(n + 1.0) + 0.5 * std::log(std::numbers::pi));
  return std::exp(log_norm);
}

double com_wavefunction(int n, double X) {
  if (n < 0 || n > specfun::kDefaultHermiteMaxOrder) {
    std::ostringstream os;
    os << "com_wavefunction: order " << n << " outside [0, " << specfun::kDefaultHermiteMaxOrder
       << "]";
    throw DomainError(os.str());
  }
  static const double kPiQuarter = std::pow(std::numbers::pi, -0.25);
  double prev = kPiQuarter * std::exp(-0.5 * X * X);
  if (n == 0) return prev;
  double cur = std::numbers::sqrt2 * X * prev;
  for (int k = 1; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * X * cur -
                        std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void com_wavefunctions(double X, std::span<double> out) {
  if (out.empty()) return;
  if (out.size() > static_cast<std::size_t>(specfun::kDefaultHermiteMaxOrder) + 1)
    throw DomainError("com_wavefunctions: too many orders requested");
  static const double kPiQuarter = std::pow(std::numbers::pi, -0.25);
  out[0] = kPiQuarter * std::exp(-0.5 * X * X);
  if (out.size() == 1) return;
  out[1] = std::numbers::sqrt2 * X * out[0];
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kd = static_cast<double>(k);
    out[k + 1] = std::sqrt(2.0 / (kd + 1)) * X * out[k] - std::sqrt(kd / (kd + 1)) * out[k - 1];
  }
}

RelativeState::RelativeState(int index, double energy)
    : index_(index),
      energy_(energy),
      norm_(normalize_relative(energy)),
      extent_(std::sqrt(2.0 * energy) + kTableMargin),
      panel_width_(kPanelWidth),
      degree_(kChebyshevDegree) {
  const int panels = static_cast<int>(std::ceil(extent_ / panel_width_));
  extent_ = panels * panel_width_;
  const int m = degree_ + 1;
  coeffs_.assign(static_cast<std::size_t>(panels * m), 0.0);
  std::vector<double> samples(static_cast<std::size_t>(m));
  for (int p = 0; p < panels; ++p) {
    const double lo = p * panel_width_;
    const double mid = lo + 0.5 * panel_width_;
    for (int j = 0; j < m; ++j) {
      const double t = std::cos(std::numbers::pi * (j + 0.5) / m);
      samples[static_cast<std::size_t>(j)] = exact(mid + 0.5 * panel_width_ * t);
    }
    for (int k = 0; k < m; ++k) {
      double c = 0.0;
      for (int j = 0; j < m; ++j)
        c += samples[static_cast<std::size_t>(j)] * std::cos(std::numbers::pi * k * (j + 0.5) / m);
      coeffs_[static_cast<std::size_t>(p * m + k)] = (k == 0 ? 1.0 : 2.0) * c / m;
    }
  }
}

double RelativeState::exact(double x) const { return norm_ * relative_wavefunction(energy_, x); }

double RelativeState::operator()(double x) const {
  const double r = std::abs(x);
  if (r >= extent_) return exact(r);
  const int m = degree_ + 1;
  const int p = std::min(static_cast<int>(r / panel_width_),
                         static_cast<int>(coeffs_.size()) / m - 1);
  const double t = 2.0 * (r - p * panel_width_) / panel_width_ - 1.0;
  const double* c = coeffs_.data() + static_cast<std::ptrdiff_t>(p) * m;
  // Clenshaw
  double b1 = 0.0, b2 = 0.0;
  for (int k = degree_; k >= 1; --k) {
    const double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

Spectrum::Spectrum(Coupling g, int relative_count)
    : g_(g), energies_(solve_relative_energies(g, relative_count)) {
  relative_.reserve(energies_.size());
  for (std::size_t k = 0; k < energies_.size(); ++k)
    relative_.push_back(std::make_shared<const RelativeState>(static_cast<int>(k), energies_[k]));
}

Spectrum Spectrum::covering(Coupling g, double e_max) {
  // relative level nu has E_rel >= 1/2 + 2 nu and E_com >= 1/2
  const int count = std::max(1, static_cast<int>(std::floor((e_max - 1.0) / 2.0)) + 1);
  return Spectrum(g, count);
}

EigenPair Spectrum::pair(int n, int nu) const {
  if (nu < 0 || nu >= relative_count()) {
    std::ostringstream os;
    os << "relative index " << nu << " outside the solved range [0, " << relative_count() << ")";
    throw DomainError(os.str());
  }
  if (n < 0 || n > specfun::kDefaultHermiteMaxOrder)
    throw DomainError("centre-of-mass index outside [0, 200]");
  EigenPair p;
  p.n = n;
  p.nu = nu;
  p.E_com = n + 0.5;
  p.E_rel = energies_[static_cast<std::size_t>(nu)];
  p.E_total = p.E_com + p.E_rel;
  p.norm_com = com_norm(n);
  p.relative = relative_[static_cast<std::size_t>(nu)];
  p.norm_rel = p.relative->norm();
  return p;
}

std::vector<EigenPair> Spectrum::states_below(double e_max) const {
  // the first unsolved level starts at 1/2 + 2 * count
  if (0.5 + 0.5 + 2.0 * relative_count() <= e_max) {
    std::ostringstream os;
    os << "spectrum with " << relative_count() << " relative levels cannot enumerate E <= "
       << e_max;
    throw ConfigError(os.str());
  }
  std::vector<EigenPair> out;
  for (int nu = 0; nu < relative_count(); ++nu) {
    const double e_rel = energies_[static_cast<std::size_t>(nu)];
    for (int n = 0; n + 0.5 + e_rel <= e_max; ++n) out.push_back(pair(n, nu));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const EigenPair& a, const EigenPair& b) { return a.E_total < b.E_total; });
  return out;
}

double two_body_psi(const EigenPair& pair, double x1, double x2) {
  const double X = (x1 + x2) / std::numbers::sqrt2;
  const double x = (x1 - x2) / std::numbers::sqrt2;
  return pair.com(X) * pair.rel(x);
}

} // namespace spatent::twoboson
