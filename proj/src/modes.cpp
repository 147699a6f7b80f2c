#include "spatent/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "spatent/error.hpp"
#include "spatent/quadrature.hpp"

namespace spatent::modes {
namespace {

constexpr double kNormTolerance = 1e-10;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double tabulated_value(const Tabulated& t, double x) {
  if (x < t.x.front() || x > t.x.back()) return 0.0;
  const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  if (it == t.x.end()) return t.values.back();
  const auto i = static_cast<std::size_t>(it - t.x.begin()) - 1;
  const double s = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
  return (1.0 - s) * t.values[i] + s * t.values[i + 1];
}

bool overlapping(const SpatialMode& a, const SpatialMode& b) {
  return std::min(a.hi(), b.hi()) > std::max(a.lo(), b.lo());
}

} // namespace

SpatialMode::SpatialMode(double lo, double hi, Weight weight, double truncation)
    : lo_(lo), hi_(hi), weight_(std::move(weight)) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
    throw ConfigError("mode interval (" + fmt(lo) + ", " + fmt(hi) + ") is empty");
  if (!(truncation > 0.0) || !std::isfinite(truncation))
    throw ConfigError("mode truncation must be finite and > 0");
  if (std::isinf(lo_)) lo_ = -truncation;
  if (std::isinf(hi_)) hi_ = truncation;
  if (!(lo_ < hi_))
    throw ConfigError("mode interval (" + fmt(lo) + ", " + fmt(hi) +
                      ") is empty after truncation at " + fmt(truncation));

  double norm2 = 0.0;
  if (std::holds_alternative<Uniform>(weight_)) {
    norm2 = hi_ - lo_;
  } else if (const auto* gw = std::get_if<Gaussian>(&weight_)) {
    if (!(gw->width > 0.0) || !std::isfinite(gw->center))
      throw ConfigError("Gaussian mode weight needs width > 0");
    // int exp(-(x-c)^2 / w^2) dx
    const double w = gw->width;
    norm2 = 0.5 * w * std::sqrt(std::numbers::pi) *
            (std::erf((hi_ - gw->center) / w) - std::erf((lo_ - gw->center) / w));
  } else {
    auto& t = std::get<Tabulated>(weight_);
    if (t.x.size() < 2 || t.x.size() != t.values.size())
      throw ConfigError("tabulated mode weight needs >= 2 matching nodes");
    for (std::size_t i = 1; i < t.x.size(); ++i)
      if (!(t.x[i] > t.x[i - 1])) throw ConfigError("tabulated mode grid must increase");
    if (t.x.front() < lo_ || t.x.back() > hi_)
      throw ConfigError("tabulated mode grid leaves the mode interval");
    for (std::size_t i = 1; i < t.x.size(); ++i) {
      const double a = t.values[i - 1], b = t.values[i];
      norm2 += (t.x[i] - t.x[i - 1]) * (a * a + a * b + b * b) / 3.0;
    }
  }
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw ConfigError("mode weight on (" + fmt(lo_) + ", " + fmt(hi_) + ") cannot be normalised");
  scale_ = 1.0 / std::sqrt(norm2);
}

double SpatialMode::operator()(double x) const {
  if (x < lo_ || x > hi_) return 0.0;
  if (std::holds_alternative<Uniform>(weight_)) return scale_;
  if (const auto* gw = std::get_if<Gaussian>(&weight_)) {
    const double u = (x - gw->center) / gw->width;
    return scale_ * std::exp(-0.5 * u * u);
  }
  return scale_ * tabulated_value(std::get<Tabulated>(weight_), x);
}

std::vector<double> SpatialMode::breakpoints() const {
  std::vector<double> pts{lo_, hi_};
  if (const auto* t = std::get_if<Tabulated>(&weight_))
    pts.insert(pts.end(), t->x.begin(), t->x.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

std::string SpatialMode::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << "[" << lo_ << "," << hi_ << "]:";
  if (std::holds_alternative<Uniform>(weight_))
    os << "uniform";
  else if (const auto* gw = std::get_if<Gaussian>(&weight_))
    os << "gaussian(" << gw->center << "," << gw->width << ")";
  else
    os << "tabulated(" << std::get<Tabulated>(weight_).x.size() << ")";
  return os.str();
}

ModeSet::ModeSet(std::vector<SpatialMode> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) throw ConfigError("mode set is empty");
  for (std::size_t i = 0; i < modes_.size(); ++i)
    for (std::size_t j = i + 1; j < modes_.size(); ++j)
      if (overlapping(modes_[i], modes_[j]))
        throw ConfigError("modes " + std::to_string(i) + " and " + std::to_string(j) +
                          " overlap: " + modes_[i].describe() + " vs " + modes_[j].describe());
}

std::string ModeSet::describe() const {
  std::string s;
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (i) s += ";";
    s += modes_[i].describe();
  }
  return s;
}

ModeSet ModeSet::equal_split(double lo, double hi, int count, double truncation) {
  if (count < 1) throw ConfigError("equal_split: need at least one mode");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("equal_split: need a finite interval lo < hi");
  std::vector<SpatialMode> m;
  const double h = (hi - lo) / count;
  for (int i = 0; i < count; ++i) {
    const double a = lo + i * h;
    const double b = i + 1 == count ? hi : lo + (i + 1) * h;
    m.emplace_back(a, b, Uniform{}, truncation);
  }
  return ModeSet(std::move(m));
}

ModeSet ModeSet::symmetric_pair(double half_length) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw ConfigError("symmetric_pair: half-length must be finite and > 0");
  return ModeSet({SpatialMode(-half_length, 0.0), SpatialMode(0.0, half_length)});
}

ModeSet ModeSet::three_mode(double central_length, double truncation) {
  if (!(central_length > 0.0) || !(central_length < 2.0 * truncation))
    throw ConfigError("three_mode: central length must lie in (0, 2 X_max)");
  const double h = 0.5 * central_length;
  constexpr double inf = std::numeric_limits<double>::infinity();
  return ModeSet({SpatialMode(-inf, -h, Uniform{}, truncation),
                  SpatialMode(-h, h, Uniform{}, truncation),
                  SpatialMode(h, inf, Uniform{}, truncation)});
}

StateCorrelator state_correlator(const ModeSet& modes, const twoboson::EigenPair& pair,
                                 const CorrelatorOptions& opt) {
  const std::size_t m = modes.size();
  const double R = pair.extent();

  quad::Options inner;
  inner.abs_tol = opt.inner_tol;
  inner.rel_tol = 0.0;
  inner.max_panel = 1.0;
  std::vector<std::vector<double>> mode_edges;
  mode_edges.reserve(m);
  for (const auto& mode : modes) mode_edges.push_back(mode.breakpoints());

  // F_i(y) = int g_i(x) Psi(x, y) dx, cusp at x = y
  std::vector<double> F(m);
  std::vector<double> edges;
  double inner_err = 0.0;
  const auto fill_F = [&](double y) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto& mode = modes[i];
      edges = mode_edges[i];
      if (y > mode.lo() && y < mode.hi()) edges.push_back(y);
      const auto r = quad::integrate(
          [&](double x) { return mode(x) * twoboson::two_body_psi(pair, x, y); },
          std::span<const double>(edges), inner);
      F[i] = r.value;
      inner_err = std::max(inner_err, r.error);
    }
  };

  std::vector<double> outer_edges{-R, R};
  for (const auto& mode : modes)
    for (double p : {mode.lo(), mode.hi()})
      if (std::abs(p) < R) outer_edges.push_back(p);

  quad::Options outer;
  outer.abs_tol = opt.abs_tol;
  outer.rel_tol = 0.0;
  outer.max_panel = 1.0;
  const std::size_t dim = m * (m + 1) / 2;
  const auto r = quad::integrate_vector(
      [&](double y, std::span<double> out) {
        fill_F(y);
        std::size_t k = 0;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = i; j < m; ++j) out[k++] = F[i] * F[j];
      },
      dim, std::span<const double>(outer_edges), outer);

  StateCorrelator sc;
  sc.M.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      sc.M(a, b) = sc.M(b, a) = r.value[k++];
    }
  // inner errors enter the product at most twice, over a window of length 2R
  sc.error = r.error + 2.0 * R * 2.0 * inner_err;
  return sc;
}

StateCorrelator StateCorrelatorCache::get(const std::string& coupling,
                                          const twoboson::EigenPair& pair) {
  const auto key = std::make_tuple(coupling, pair.n, pair.nu);
  {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto sc = state_correlator(modes_, pair, opt_);
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(sc)).first->second;
}

namespace {

template <class PerState>
CorrelatorMatrix assemble(const ModeSet& modes, const sprdm::SprdmEvaluator& kernel,
                          PerState&& per_state) {
  const auto m = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(m, m);
  double err = 0.0;
  for (const auto& t : kernel.terms()) {
    const StateCorrelator sc = per_state(t.pair);
    acc += t.weight * sc.M;
    err += t.weight * sc.error;
  }
  CorrelatorMatrix out;
  out.M = acc.cast<std::complex<double>>();
  out.quad_error = err;
  out.T = kernel.temperature();
  out.modes = modes.describe();
  out.states = kernel.terms().size();
  out.residual_weight = kernel.ensemble().cutoff.residual_bound;
  return out;
}

} // namespace

CorrelatorMatrix correlator_matrix(const ModeSet& modes, const sprdm::SprdmEvaluator& kernel,
                                   const CorrelatorOptions& opt) {
  return assemble(modes, kernel,
                  [&](const twoboson::EigenPair& p) { return state_correlator(modes, p, opt); });
}

CorrelatorMatrix correlator_matrix(StateCorrelatorCache& cache,
                                   const sprdm::SprdmEvaluator& kernel,
                                   const std::string& coupling) {
  auto out = assemble(cache.modes(), kernel,
                      [&](const twoboson::EigenPair& p) { return cache.get(coupling, p); });
  out.coupling = coupling;
  return out;
}

CorrelatorMatrix correlator_matrix(const ModeSet& modes, const KernelFunction& kernel,
                                   std::span<const double> kinks, const CorrelatorOptions& opt) {
  const std::size_t m = modes.size();
  quad::Options qo;
  qo.abs_tol = opt.inner_tol;
  qo.rel_tol = 0.0;
  qo.max_panel = 1.0;
  CorrelatorMatrix out;
  out.M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  out.modes = modes.describe();
  const auto edges_for = [&](const SpatialMode& mode, double extra) {
    auto e = mode.breakpoints();
    for (double k : kinks)
      if (k > mode.lo() && k < mode.hi()) e.push_back(k);
    if (extra > mode.lo() && extra < mode.hi()) e.push_back(extra);
    return e;
  };
  double err = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const auto& a = modes[i];
      const auto& b = modes[j];
      double inner_err = 0.0;
      const auto outer_edges = edges_for(a, std::numeric_limits<double>::quiet_NaN());
      const auto r = quad::integrate(
          [&](double x) {
            const auto e = edges_for(b, x);
            const auto in = quad::integrate([&](double xp) { return b(xp) * kernel(x, xp); },
                                            std::span<const double>(e), qo);
            inner_err = std::max(inner_err, in.error);
            return a(x) * in.value;
          },
          std::span<const double>(outer_edges), qo);
      const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
      out.M(I, J) = r.value;
      out.M(J, I) = r.value;
      err = std::max(err, r.error + inner_err * std::sqrt(a.length()));
    }
  out.quad_error = err;
  out.coupling = "custom";
  return out;
}

std::complex<double> epsilon_pair(const SpatialMode& a, const SpatialMode& b,
                                  const sprdm::SprdmEvaluator& kernel,
                                  const CorrelatorOptions& opt) {
  if (overlapping(a, b))
    throw ConfigError("epsilon_pair: modes overlap: " + a.describe() + " vs " + b.describe());
  const auto M = correlator_matrix(ModeSet({a, b}), kernel, opt);
  return M.M(0, 1);
}

Block Block::uniform(std::vector<std::size_t> members) {
  if (members.empty()) throw ConfigError("block must have at least one member");
  Block b;
  const double c = 1.0 / std::sqrt(static_cast<double>(members.size()));
  b.coefficients.assign(members.size(), c);
  b.members = std::move(members);
  return b;
}

namespace {

void check_block(const Block& b, std::size_t size, const char* name) {
  if (b.members.empty() || b.members.size() != b.coefficients.size())
    throw ConfigError(std::string("block ") + name + ": members and coefficients must match");
  double norm = 0.0;
  for (std::size_t k = 0; k < b.members.size(); ++k) {
    if (b.members[k] >= size)
      throw DomainError(std::string("block ") + name + ": mode index " +
                        std::to_string(b.members[k]) + " out of range");
    norm += std::norm(b.coefficients[k]);
  }
  if (std::abs(norm - 1.0) > kNormTolerance)
    throw ConfigError(std::string("block ") + name + ": coefficients not normalised (sum |c|^2 = " +
                      fmt(norm) + ")");
}

void check_disjoint(std::span<const std::size_t> A, std::span<const std::size_t> B,
                    std::size_t size) {
  if (A.empty() || B.empty()) throw ConfigError("blocks must be nonempty");
  std::vector<char> seen(size, 0);
  for (auto i : A) {
    if (i >= size) throw DomainError("mode index " + std::to_string(i) + " out of range");
    seen[i] = 1;
  }
  for (auto j : B) {
    if (j >= size) throw DomainError("mode index " + std::to_string(j) + " out of range");
    if (seen[j]) throw ConfigError("blocks share mode " + std::to_string(j));
  }
}

} // namespace

std::complex<double> block_epsilon(const Block& A, const Block& B, const CorrelatorMatrix& M) {
  check_block(A, M.size(), "A");
  check_block(B, M.size(), "B");
  check_disjoint(A.members, B.members, M.size());
  std::complex<double> sum = 0.0;
  for (std::size_t a = 0; a < A.members.size(); ++a)
    for (std::size_t b = 0; b < B.members.size(); ++b)
      sum += A.coefficients[a] * std::conj(B.coefficients[b]) *
             M.M(static_cast<Eigen::Index>(A.members[a]), static_cast<Eigen::Index>(B.members[b]));
  return sum;
}

double max_block_epsilon(std::span<const std::size_t> A, std::span<const std::size_t> B,
                         const CorrelatorMatrix& M) {
  check_disjoint(A, B, M.size());
  Eigen::MatrixXcd sub(static_cast<Eigen::Index>(A.size()), static_cast<Eigen::Index>(B.size()));
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t b = 0; b < B.size(); ++b)
      sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          M.M(static_cast<Eigen::Index>(A[a]), static_cast<Eigen::Index>(B[b]));
  if (sub.size() == 1) return std::abs(sub(0, 0));
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sub);
  return svd.singularValues()(0);
}

std::vector<Bipartition> enumerate_bipartitions(int mode_count) {
  if (mode_count < 2 || mode_count > kMaxBipartitionModes)
    throw ConfigError("bipartitions need 2 <= M <= " + std::to_string(kMaxBipartitionModes) +
                      ", got " + std::to_string(mode_count));
  const std::uint32_t rest = static_cast<std::uint32_t>(mode_count) - 1;
  std::vector<Bipartition> out;
  out.reserve((std::size_t{1} << rest) - 1);
  // mode 0 stays in A; a nonzero proper mask over modes 1..M-1 picks B
  for (std::uint32_t mask = 1; mask < (1u << rest); ++mask) {
    Bipartition p;
    p.A.push_back(0);
    for (std::uint32_t k = 0; k < rest; ++k)
      (mask >> k & 1u ? p.B : p.A).push_back(k + 1);
    out.push_back(std::move(p));
  }
  return out;
}

SeparabilityReport classify_separability(const CorrelatorMatrix& M, double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("separability threshold must be > 0");
  const auto m = M.size();
  SeparabilityReport rep;
  rep.threshold = threshold;
  rep.min_value = std::numeric_limits<double>::infinity();
  for (auto& split : enumerate_bipartitions(static_cast<int>(m))) {
    BipartitionValue v;
    v.value = max_block_epsilon(split.A, split.B, M);
    v.margin = v.value - threshold;
    v.split = std::move(split);
    if (v.value <= threshold) rep.vanishing.push_back(rep.values.size());
    rep.min_value = std::min(rep.min_value, v.value);
    rep.values.push_back(std::move(v));
  }
  rep.verdict = rep.vanishing.empty() ? Verdict::FullyEntangled : Verdict::NotFullyEntangled;

  // union-find over the coherence graph
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (std::abs(M.M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) > threshold)
        parent[find(i)] = find(j);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m; ++i) groups[find(i)].push_back(i);
  for (auto& [root, members] : groups) rep.coherence_components.push_back(std::move(members));
  std::sort(rep.coherence_components.begin(), rep.coherence_components.end());
  return rep;
}

SeparabilityReport classify_separability(const ModeSet& modes,
                                         const sprdm::SprdmEvaluator& kernel, double threshold) {
  return classify_separability(correlator_matrix(modes, kernel), threshold);
}

std::string to_string(Verdict v) {
  return v == Verdict::FullyEntangled ? "FullyEntangled" : "NotFullyEntangled";
}

} // namespace spatent::modes
