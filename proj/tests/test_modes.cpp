#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "spatent/error.hpp"
#include "spatent/modes.hpp"

using namespace spatent;
using namespace spatent::modes;
using twoboson::Coupling;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

sprdm::SprdmEvaluator ground_kernel(const char* g) {
  return sprdm::SprdmEvaluator(sprdm::build_ensemble(Coupling::parse(g), 0.0));
}

double norm_squared(const SpatialMode& m) {
  return oracle::gauss_legendre([&](double x) { return m(x) * m(x); }, m.lo(), m.hi(), 400);
}

CorrelatorMatrix from_real(const Eigen::MatrixXd& A) {
  CorrelatorMatrix M;
  M.M = A.cast<std::complex<double>>();
  return M;
}

} // namespace

TEST_CASE("mode weights are normalised") {
  CHECK(norm_squared(SpatialMode(-2.0, 0.5)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm_squared(SpatialMode(-1.0, 3.0, Gaussian{0.4, 0.8})) == doctest::Approx(1.0).epsilon(1e-12));
  const SpatialMode tab(0.0, 2.0, Tabulated{{0.2, 1.0, 1.5}, {1.0, 3.0, -0.5}});
  // piecewise linear: integrate each piece exactly with the 10-point rule
  const double n = oracle::gauss_legendre([&](double x) { return tab(x) * tab(x); }, 0.2, 1.0, 1) +
                   oracle::gauss_legendre([&](double x) { return tab(x) * tab(x); }, 1.0, 1.5, 1);
  CHECK(n == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(tab(0.1) == 0.0);
  CHECK(tab.breakpoints().size() == 5);
}

TEST_CASE("infinite intervals are truncated") {
  const SpatialMode m(-kInf, -1.0);
  CHECK(m.lo() == -kDefaultTruncation);
  CHECK(m(-0.5) == 0.0);
  CHECK(m(-3.0) == doctest::Approx(1.0 / std::sqrt(kDefaultTruncation - 1.0)));
  const SpatialMode w(0.0, kInf, Uniform{}, 5.0);
  CHECK(w.hi() == 5.0);
  CHECK_THROWS_AS(SpatialMode(9.0, kInf), ConfigError);
}

TEST_CASE("invalid modes are rejected") {
  CHECK_THROWS_AS(SpatialMode(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(SpatialMode(2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(SpatialMode(0.0, 1.0, Gaussian{0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(SpatialMode(0.0, 1.0, Tabulated{{0.0, 2.0}, {1.0, 1.0}}), ConfigError);
  CHECK_THROWS_AS(SpatialMode(0.0, 1.0, Tabulated{{0.0, 1.0}, {0.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(ModeSet({SpatialMode(0.0, 1.0), SpatialMode(0.5, 2.0)}), ConfigError);
  CHECK_NOTHROW(ModeSet({SpatialMode(0.0, 1.0), SpatialMode(1.0, 2.0)}));
  CHECK_THROWS_AS(ModeSet(std::vector<SpatialMode>{}), ConfigError);
}

TEST_CASE("mode set factories") {
  const auto split = ModeSet::equal_split(-3.0, 3.0, 4);
  REQUIRE(split.size() == 4);
  CHECK(split[0].lo() == -3.0);
  CHECK(split[3].hi() == 3.0);
  CHECK(split[1].length() == doctest::Approx(1.5));
  const auto tri = ModeSet::three_mode(1.4);
  CHECK(tri[0].lo() == -kDefaultTruncation);
  CHECK(tri[1].lo() == doctest::Approx(-0.7));
  CHECK(tri[2].hi() == kDefaultTruncation);
}

TEST_CASE("closed-form witness for the ideal pair") {
  // sqrt(pi) erf^2(X/sqrt2) / (2X) at X = 2
  const double expected = std::sqrt(std::numbers::pi) * std::pow(std::erf(std::numbers::sqrt2), 2) / 4.0;
  const auto eps = epsilon_pair(SpatialMode(-2.0, 0.0), SpatialMode(0.0, 2.0), ground_kernel("0"));
  CHECK(eps.imag() == 0.0);
  CHECK(std::abs(eps.real() - expected) <= 1e-12);
}

TEST_CASE("factorised witness agrees with direct double quadrature of the kernel") {
  const auto k = ground_kernel("2");
  const SpatialMode a(-2.5, -0.2, Gaussian{-1.0, 0.7});
  const SpatialMode b(0.1, 1.9);
  const auto fast = epsilon_pair(a, b, k);
  // independent route: 2-D Gauss-Legendre over the rectangle of the pointwise kernel
  const double slow = oracle::gauss_legendre(
      [&](double x) {
        return a(x) * oracle::gauss_legendre([&](double xp) { return b(xp) * k(x, xp); }, b.lo(), b.hi(), 4);
      },
      a.lo(), a.hi(), 6);
  CHECK(std::abs(fast.real() - slow) <= 1e-8);
}

TEST_CASE("witness is Hermitian and needs disjoint modes") {
  const auto k = ground_kernel("5");
  const SpatialMode a(-1.0, 0.0), b(0.0, 2.0);
  CHECK(epsilon_pair(a, b, k) == std::conj(epsilon_pair(b, a, k)));
  CHECK_THROWS_AS(epsilon_pair(a, SpatialMode(-0.5, 1.0), k), ConfigError);
}

TEST_CASE("kernel vanishing across two intervals gives zero") {
  const ModeSet ms({SpatialMode(-2.0, 0.0), SpatialMode(0.0, 2.0)});
  const KernelFunction blockwise = [](double x, double xp) {
    return (x < 0.0) == (xp < 0.0) ? std::exp(-x * x - xp * xp) : 0.0;
  };
  const std::array<double, 1> kink{0.0};
  const auto M = correlator_matrix(ms, blockwise, kink);
  CHECK(std::abs(M.M(0, 1)) == 0.0);
  CHECK(M.M(0, 0).real() > 0.0);
}

TEST_CASE("correlator matrix properties") {
  SUBCASE("single mode") {
    const auto M = correlator_matrix(ModeSet({SpatialMode(-1.0, 1.0)}), ground_kernel("1"));
    REQUIRE(M.size() == 1);
    CHECK(M.M(0, 0).real() > 0.0);
    CHECK(M.M(0, 0).real() <= 1.0);
  }
  SUBCASE("mirror modes share their diagonal") {
    const auto M = correlator_matrix(ModeSet::symmetric_pair(1.5), ground_kernel("10"));
    CHECK(M.M(0, 0).real() == doctest::Approx(M.M(1, 1).real()).epsilon(1e-12));
  }
  SUBCASE("thermal matrix is positive semidefinite") {
    const sprdm::SprdmEvaluator k(sprdm::build_ensemble(Coupling::finite(2.0), 0.5));
    const auto M = correlator_matrix(ModeSet::equal_split(-4.0, 4.0, 4), k);
    CHECK((M.M - M.M.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.M);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    for (int i = 0; i < 4; ++i) {
      CHECK(M.M(i, i).real() >= 0.0);
      CHECK(M.M(i, i).real() <= 1.0);
    }
    CHECK(M.states == k.terms().size());
    CHECK(M.residual_weight > 0.0);
  }
}

TEST_CASE("cached correlators equal direct ones") {
  const ModeSet ms = ModeSet::symmetric_pair(2.0);
  StateCorrelatorCache cache(ms);
  const sprdm::SprdmEvaluator k(sprdm::build_ensemble(Coupling::finite(5.0), 0.75));
  const auto a = correlator_matrix(cache, k, "5");
  const auto b = correlator_matrix(ms, k);
  CHECK((a.M - b.M).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.coupling == "5");
  // second pass reuses the cache
  const auto c = correlator_matrix(cache, k, "5");
  CHECK((a.M - c.M).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("block witness") {
  Eigen::MatrixXd A(4, 4);
  A << 0.4, 0.1, 0.2, 0.05, 0.1, 0.3, 0.07, 0.02, 0.2, 0.07, 0.25, 0.11, 0.05, 0.02, 0.11, 0.2;
  const auto M = from_real(A);
  CHECK(block_epsilon(Block::uniform({1}), Block::uniform({2}), M) == M.M(1, 2));
  Block sparse_a{{0, 1}, {0.0, 1.0}};
  Block sparse_b{{2, 3}, {1.0, 0.0}};
  CHECK(block_epsilon(sparse_a, sparse_b, M) == M.M(1, 2));
  const auto e = block_epsilon(Block::uniform({0, 1}), Block::uniform({2, 3}), M);
  CHECK(e.real() == doctest::Approx((A(0, 2) + A(0, 3) + A(1, 2) + A(1, 3)) / 2));

  CHECK_THROWS_AS(block_epsilon(Block{{0}, {0.5}}, Block::uniform({1}), M), ConfigError);
  CHECK_THROWS_AS(block_epsilon(Block::uniform({7}), Block::uniform({1}), M), DomainError);
  CHECK_THROWS_AS(block_epsilon(Block::uniform({0, 1}), Block::uniform({1}), M), ConfigError);
}

TEST_CASE("largest block singular value") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4, 4);
  A(0, 2) = A(2, 0) = 0.3;
  A(0, 3) = A(3, 0) = 0.1;
  A(1, 2) = A(2, 1) = 0.1;
  A(1, 3) = A(3, 1) = 0.2;
  const auto M = from_real(A);
  const std::vector<std::size_t> left{0, 1}, right{2, 3};
  // (0.5 + sqrt(0.05)) / 2
  CHECK(max_block_epsilon(left, right, M) == doctest::Approx(0.36180339887498948482).epsilon(1e-14));
  const std::vector<std::size_t> one{0}, two{2};
  CHECK(max_block_epsilon(one, two, M) == doctest::Approx(0.3));
  const std::vector<std::size_t> z1{0}, z2{1};
  CHECK(max_block_epsilon(z1, z2, M) == 0.0);
}

TEST_CASE("bipartition enumeration") {
  for (int m = 2; m <= 10; ++m) {
    const auto parts = enumerate_bipartitions(m);
    CHECK(parts.size() == (std::size_t{1} << (m - 1)) - 1);
    std::set<std::vector<std::size_t>> seen;
    for (const auto& p : parts) {
      CHECK(p.A.front() == 0);
      CHECK(!p.B.empty());
      CHECK(p.A.size() + p.B.size() == static_cast<std::size_t>(m));
      std::vector<std::size_t> all = p.A;
      all.insert(all.end(), p.B.begin(), p.B.end());
      std::sort(all.begin(), all.end());
      for (int i = 0; i < m; ++i) CHECK(all[i] == static_cast<std::size_t>(i));
      CHECK(seen.insert(p.B).second);
    }
  }
  CHECK_THROWS_AS(enumerate_bipartitions(1), ConfigError);
  CHECK_THROWS_AS(enumerate_bipartitions(21), ConfigError);
}

TEST_CASE("separability verdicts") {
  SUBCASE("rank-one Gaussian kernel over four modes") {
    const KernelFunction phi00 = [](double x, double xp) {
      return oracle::hermite_function(0, x) * oracle::hermite_function(0, xp);
    };
    const auto rep = classify_separability(correlator_matrix(ModeSet::equal_split(-3, 3, 4), phi00));
    CHECK(rep.verdict == Verdict::FullyEntangled);
    CHECK(rep.values.size() == 7);
    CHECK(rep.vanishing.empty());
    CHECK(rep.min_value > 0.0);
    CHECK(rep.coherence_components.size() == 1);
  }
  SUBCASE("kernel confined to one side") {
    const KernelFunction left = [](double x, double xp) {
      return x < 0.0 && xp < 0.0 ? std::exp(-(x + 1) * (x + 1) - (xp + 1) * (xp + 1)) : 0.0;
    };
    const std::array<double, 1> kink{0.0};
    const ModeSet ms({SpatialMode(-3, -1.5), SpatialMode(-1.5, 0), SpatialMode(0.5, 2)});
    const auto rep = classify_separability(correlator_matrix(ms, left, kink));
    CHECK(rep.verdict == Verdict::NotFullyEntangled);
    // {0, 1} | {2} is the only split with mode 2 alone
    REQUIRE(rep.vanishing.size() == 1);
    CHECK(rep.values[rep.vanishing[0]].split.B == std::vector<std::size_t>{2});
    CHECK(rep.values[rep.vanishing[0]].margin < 0.0);
    REQUIRE(rep.coherence_components.size() == 2);
    CHECK(rep.coherence_components[0] == std::vector<std::size_t>{0, 1});
    CHECK(rep.coherence_components[1] == std::vector<std::size_t>{2});
  }
  SUBCASE("two modes reduce to the pair witness") {
    Eigen::MatrixXd A(2, 2);
    A << 0.5, 2e-6, 2e-6, 0.5;
    CHECK(classify_separability(from_real(A)).verdict == Verdict::FullyEntangled);
    CHECK(classify_separability(from_real(A), 3e-6).verdict == Verdict::NotFullyEntangled);
  }
  CHECK_THROWS_AS(classify_separability(from_real(Eigen::MatrixXd::Identity(2, 2)), 0.0), ConfigError);
  CHECK(to_string(Verdict::FullyEntangled) == "FullyEntangled");
}

TEST_CASE("per-mode separable kernels show no coherence") {
  // convex sum of rank-one kernels, each supported inside one mode
  const ModeSet ms = ModeSet::equal_split(-3, 3, 3);
  const KernelFunction sep = [](double x, double xp) {
    const auto bump = [](double c, double t) {
      return std::abs(t - c) < 1.0 ? std::cos(0.5 * std::numbers::pi * (t - c)) : 0.0;
    };
    double s = 0.0;
    for (double c : {-2.0, 0.0, 2.0}) s += (c == 0 ? 0.5 : 0.25) * bump(c, x) * bump(c, xp);
    return s;
  };
  const std::array<double, 2> kinks{-1.0, 1.0};
  const auto M = correlator_matrix(ms, sep, kinks);
  for (const auto& p : enumerate_bipartitions(3)) CHECK(max_block_epsilon(p.A, p.B, M) <= 1e-12);
}

TEST_CASE("largest singular value is invariant under block-local unitaries") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  const auto random_unitary = [&](int d) {
    Eigen::MatrixXcd Z(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) Z(i, j) = {n(rng), n(rng)};
    return Eigen::HouseholderQR<Eigen::MatrixXcd>(Z).householderQ() * Eigen::MatrixXcd::Identity(d, d);
  };
  const sprdm::SprdmEvaluator k(sprdm::build_ensemble(Coupling::finite(2.0), 0.5));
  const auto M = correlator_matrix(ModeSet::equal_split(-3, 3, 5), k);
  const std::vector<std::size_t> A{0, 2}, B{1, 3, 4};
  const double base = max_block_epsilon(A, B, M);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXcd U = random_unitary(2), V = random_unitary(3);
    Eigen::MatrixXcd sub(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) sub(i, j) = M.M(A[i], B[j]);
    CorrelatorMatrix R;
    R.M = Eigen::MatrixXcd::Zero(5, 5);
    R.M.block(0, 2, 2, 3) = U * sub * V.adjoint();
    const std::vector<std::size_t> a{0, 1}, b{2, 3, 4};
    CHECK(std::abs(max_block_epsilon(a, b, R) - base) <= 1e-10);
  }
  // a common phase on both weights leaves |eps| unchanged
  const std::complex<double> phase = std::polar(1.0, 0.7);
  const auto e = block_epsilon(Block{{0}, {phase}}, Block{{1}, {phase}}, M);
  CHECK(std::abs(std::abs(e) - std::abs(M.M(0, 1))) <= 1e-15);
}

TEST_CASE("coarse-block coherence implies some pairwise coherence") {
  const auto M = correlator_matrix(ModeSet::equal_split(-3, 3, 4), ground_kernel("1"));
  for (const auto& p : enumerate_bipartitions(4)) {
    if (max_block_epsilon(p.A, p.B, M) <= 1e-9) continue;
    bool any = false;
    for (auto i : p.A)
      for (auto j : p.B) any = any || std::abs(M.M(i, j)) > 0.0;
    CHECK(any);
  }
}

TEST_CASE("halving the tolerance stays within the error estimate") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const auto k = ground_kernel("2");
  CorrelatorOptions loose;
  loose.abs_tol = 1e-7;
  loose.inner_tol = 1e-9;
  CorrelatorOptions tight;
  tight.abs_tol = 0.5e-7;
  tight.inner_tol = 0.5e-9;
  for (int t = 0; t < 20; ++t) {
    double p[3] = {u(rng), u(rng), u(rng)};
    std::sort(p, p + 3);
    if (p[1] - p[0] < 0.05 || p[2] - p[1] < 0.05) continue;
    const ModeSet ms({SpatialMode(p[0], p[1]), SpatialMode(p[1], p[2])});
    const auto a = correlator_matrix(ms, k, loose);
    const auto b = correlator_matrix(ms, k, tight);
    CHECK(std::abs(a.M(0, 1) - b.M(0, 1)) <= a.quad_error);
  }
}
