#include "spatent/sprdm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spatent/error.hpp"
#include "spatent/quadrature.hpp"

namespace spatent::sprdm {
namespace {

/// Bound on sum exp(-(E - E0)/T) over states with E - E0 > window, using
/// n + 2 nu + 1 <= E_{n,nu} <= n + 2 nu + 2 and the multiplicity
/// floor(m/2) + 1 of m = n + 2 nu.
double omitted_weight_bound(double T, double E0, double window) {
  const double first = std::floor(E0 + window - 2.0) + 1.0;
  double sum = 0.0;
  for (double m = std::max(0.0, first);; m += 1.0) {
    const double term = (std::floor(m / 2.0) + 1.0) * std::exp(-(m + 1.0 - E0) / T);
    sum += term;
    if (term < 1e-18 * sum || term == 0.0) break;
  }
  return sum;
}

} // namespace

ThermalEnsemble thermal_weights(double T, std::span<const EigenPair> spectrum, double tail_tol) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("thermal_weights: T must be >= 0");
  if (!(tail_tol > 0.0 && tail_tol < 1.0))
    throw DomainError("thermal_weights: tail tolerance must lie in (0, 1)");
  if (spectrum.empty()) throw ConfigError("thermal_weights: empty spectrum");
  for (std::size_t i = 1; i < spectrum.size(); ++i)
    if (spectrum[i].E_total < spectrum[i - 1].E_total)
      throw DomainError("thermal_weights: spectrum must be sorted by E_total");

  ThermalEnsemble ens;
  ens.T = T;
  const double E0 = spectrum.front().E_total;
  if (T == 0.0) {
    ens.terms.push_back({spectrum.front(), 1.0});
    ens.Z = 1.0;
    ens.cutoff = {1, 0.0, 0.0};
    return ens;
  }
  const double window = T * std::log(1.0 / tail_tol);
  if (!(spectrum.back().E_total - E0 > window)) {
    std::ostringstream os;
    os << "thermal_weights: spectrum ends at E - E0 = " << spectrum.back().E_total - E0
       << ", below the Boltzmann cutoff " << window << " for T = " << T;
    throw ConfigError(os.str());
  }
  double Z = 0.0;
  for (const auto& p : spectrum) {
    const double rel = p.E_total - E0;
    if (rel > window) break;
    const double w = std::exp(-rel / T);
    ens.terms.push_back({p, w});
    Z += w;
  }
  for (auto& t : ens.terms) t.weight /= Z;
  ens.Z = Z;
  ens.cutoff.included = ens.terms.size();
  ens.cutoff.energy_window = window;
  ens.cutoff.residual_bound = omitted_weight_bound(T, E0, window) / Z;
  return ens;
}

ThermalEnsemble build_ensemble(const twoboson::Coupling& g, double T, double tail_tol) {
  if (T == 0.0) {
    const twoboson::Spectrum spec(g, 1);
    const std::vector<EigenPair> ground{spec.ground()};
    return thermal_weights(0.0, ground, tail_tol);
  }
  // E0 <= 2 for every repulsive coupling; one extra unit certifies the cutoff
  const double e_max = 2.0 + T * std::log(1.0 / tail_tol) + 1.0;
  const auto spec = twoboson::Spectrum::covering(g, e_max + 2.0);
  const auto states = spec.states_below(e_max);
  return thermal_weights(T, states, tail_tol);
}

double sprdm_pure(const EigenPair& pair, double x, double xp, const KernelOptions& opt) {
  const double R = pair.extent();
  std::vector<double> edges{-R, R};
  if (std::abs(x) < R) edges.push_back(x);
  if (std::abs(xp) < R) edges.push_back(xp);
  quad::Options qo;
  qo.abs_tol = opt.abs_tol;
  qo.rel_tol = opt.rel_tol;
  qo.max_panel = 1.0;
  const auto r = quad::integrate(
      [&](double y) {
        return twoboson::two_body_psi(pair, x, y) * twoboson::two_body_psi(pair, xp, y);
      },
      std::span<const double>(edges), qo);
  return r.value;
}

double sprdm_thermal(const ThermalEnsemble& ens, double x, double xp, const KernelOptions& opt) {
  // the kernel is symmetric; a fixed argument order makes it so bitwise
  if (xp < x) std::swap(x, xp);
  if (ens.terms.size() == 1) return ens.terms.front().weight * sprdm_pure(ens.terms.front().pair, x, xp, opt);
  // One quadrature over y for the whole mixture. Every term factorises as
  // phi_n(X) psi_nu(r), so at each node a single Hermite recurrence serves
  // all n and each relative level is evaluated once.
  struct Slot {
    std::size_t n;
    std::size_t level;
    double weight;
  };
  std::vector<const twoboson::RelativeState*> levels;
  std::vector<int> level_of_nu;
  std::vector<Slot> slots;
  slots.reserve(ens.terms.size());
  std::size_t n_max = 0;
  double R = 0.0;
  for (const auto& t : ens.terms) {
    const auto nu = static_cast<std::size_t>(t.pair.nu);
    if (nu >= level_of_nu.size()) level_of_nu.resize(nu + 1, -1);
    if (level_of_nu[nu] < 0) {
      level_of_nu[nu] = static_cast<int>(levels.size());
      levels.push_back(t.pair.relative.get());
    }
    slots.push_back({static_cast<std::size_t>(t.pair.n), static_cast<std::size_t>(level_of_nu[nu]),
                     t.weight});
    n_max = std::max(n_max, static_cast<std::size_t>(t.pair.n));
    R = std::max(R, t.pair.extent());
  }
  std::vector<double> com_a(n_max + 1), com_b(n_max + 1), rel_a(levels.size()), rel_b(levels.size());
  const auto integrand = [&](double y) {
    twoboson::com_wavefunctions((x + y) / std::numbers::sqrt2, com_a);
    twoboson::com_wavefunctions((xp + y) / std::numbers::sqrt2, com_b);
    const double r_a = (x - y) / std::numbers::sqrt2;
    const double r_b = (xp - y) / std::numbers::sqrt2;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      rel_a[l] = (*levels[l])(r_a);
      rel_b[l] = (*levels[l])(r_b);
    }
    double sum = 0.0;
    for (const auto& s : slots) sum += s.weight * com_a[s.n] * com_b[s.n] * rel_a[s.level] * rel_b[s.level];
    return sum;
  };
  std::vector<double> edges{-R, R};
  if (std::abs(x) < R) edges.push_back(x);
  if (std::abs(xp) < R) edges.push_back(xp);
  quad::Options qo;
  qo.abs_tol = opt.abs_tol;
  qo.rel_tol = opt.rel_tol;
  qo.max_panel = 1.0;
  return quad::integrate(integrand, std::span<const double>(edges), qo).value;
}

SprdmEvaluator::SprdmEvaluator(const EigenPair& pure, KernelOptions opt) : opt_(opt), pure_(true) {
  ensemble_.T = 0.0;
  ensemble_.terms.push_back({pure, 1.0});
}

SprdmEvaluator::SprdmEvaluator(ThermalEnsemble ensemble, KernelOptions opt)
    : ensemble_(std::move(ensemble)), opt_(opt), pure_(false) {
  if (ensemble_.terms.empty()) throw ConfigError("SprdmEvaluator: empty ensemble");
}

double SprdmEvaluator::operator()(double x, double xp) const {
  if (pure_) return sprdm_pure(ensemble_.terms.front().pair, x, xp, opt_);
  return sprdm_thermal(ensemble_, x, xp, opt_);
}

double SprdmEvaluator::extent() const {
  double R = 0.0;
  for (const auto& t : ensemble_.terms) R = std::max(R, t.pair.extent());
  return R;
}

double SprdmEvaluator::trace(double tol) const {
  const double R = extent();
  quad::Options qo;
  qo.abs_tol = tol;
  qo.rel_tol = 0.0;
  qo.max_panel = 1.0;
  KernelOptions inner = opt_;
  inner.abs_tol = std::min(opt_.abs_tol, 0.1 * tol / (2.0 * R));
  const SprdmEvaluator diag_eval = pure_ ? SprdmEvaluator(ensemble_.terms.front().pair, inner)
                                         : SprdmEvaluator(ensemble_, inner);
  return quad::integrate([&](double x) { return diag_eval.diagonal(x); }, -R, R, qo).value;
}

Eigen::MatrixXd sprdm_grid(const SprdmEvaluator& kernel, std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("sprdm_grid: grid must be strictly increasing");
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
      G(i, j) = v;
      G(j, i) = v;
    }
  return G;
}

Eigen::VectorXd trapezoid_weights(std::span<const double> grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double h = grid[static_cast<std::size_t>(i)] - grid[static_cast<std::size_t>(i - 1)];
    w(i - 1) += 0.5 * h;
    w(i) += 0.5 * h;
  }
  return w;
}

} // namespace spatent::sprdm
