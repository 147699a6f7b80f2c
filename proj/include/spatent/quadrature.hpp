#pragma once

// Globally adaptive Gauss-Kronrod (G10/K21) integration on finite intervals.
//
// Both a scalar and a vector-valued driver are provided. The vector driver
// integrates all components on a shared subdivision and refines the interval
// with the largest componentwise error, which is what the mode-correlator
// integrals need (one outer integrand, M(M+1)/2 products).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "spatent/error.hpp"

namespace spatent::quad {

struct Options {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
  /// Initial panels are split until no longer than this (0 disables).
  double max_panel = 0.0;
  bool throw_on_failure = true;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct VectorResult {
  std::vector<double> value;
  double error = 0.0; ///< max over components of the summed error estimates
  std::size_t evaluations = 0;
  bool converged = false;
};

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double qk_error(double resk, double resg, double resabs, double resasc) {
  constexpr double epmach = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  double err = std::abs(resk - resg);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > uflow / (50.0 * epmach))
    err = std::max(epmach * 50.0 * resabs, err);
  return err;
}

/// One K21 panel for an integrand writing `dim` values into `out`.
template <class F>
double qk21_vector(F& f, std::size_t dim, double a, double b, std::span<double> result,
                   std::vector<double>& scratch) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double dhlgth = std::abs(hlgth);
  // scratch layout: 21 rows of dim values
  scratch.resize(21 * dim);
  std::span<double> fc(scratch.data(), dim);
  f(centr, fc);
  for (std::size_t j = 0; j < 10; ++j) {
    const double absc = hlgth * kXgk[j];
    f(centr - absc, std::span<double>(scratch.data() + (1 + 2 * j) * dim, dim));
    f(centr + absc, std::span<double>(scratch.data() + (2 + 2 * j) * dim, dim));
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double f0 = scratch[c];
    double resk = kWgk[10] * f0;
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (std::size_t j = 0; j < 10; ++j) {
      const double v1 = scratch[(1 + 2 * j) * dim + c];
      const double v2 = scratch[(2 + 2 * j) * dim + c];
      resk += kWgk[j] * (v1 + v2);
      resabs += kWgk[j] * (std::abs(v1) + std::abs(v2));
      if (j % 2 == 1) resg += kWg[j / 2] * (v1 + v2);
    }
    const double reskh = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(f0 - reskh);
    for (std::size_t j = 0; j < 10; ++j) {
      const double v1 = scratch[(1 + 2 * j) * dim + c];
      const double v2 = scratch[(2 + 2 * j) * dim + c];
      resasc += kWgk[j] * (std::abs(v1 - reskh) + std::abs(v2 - reskh));
    }
    result[c] = resk * hlgth;
    const double err =
        qk_error(resk * hlgth, resg * hlgth, resabs * dhlgth, resasc * dhlgth);
    worst = std::max(worst, err);
  }
  return worst;
}

template <class F>
double qk21_scalar(F& f, double a, double b, double& result) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double dhlgth = std::abs(hlgth);
  std::array<double, 10> fv1{}, fv2{};
  const double fc = f(centr);
  double resk = kWgk[10] * fc;
  double resg = 0.0;
  double resabs = std::abs(resk);
  for (std::size_t j = 0; j < 10; ++j) {
    const double absc = hlgth * kXgk[j];
    fv1[j] = f(centr - absc);
    fv2[j] = f(centr + absc);
    resk += kWgk[j] * (fv1[j] + fv2[j]);
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * (fv1[j] + fv2[j]);
  }
  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (std::size_t j = 0; j < 10; ++j)
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  result = resk * hlgth;
  return qk_error(resk * hlgth, resg * hlgth, resabs * dhlgth, resasc * dhlgth);
}

/// Sorted, deduplicated panel edges, optionally pre-split to max_panel.
inline std::vector<double> initial_edges(std::span<const double> breakpoints, double max_panel) {
  std::vector<double> pts(breakpoints.begin(), breakpoints.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2 || max_panel <= 0.0) return pts;
  std::vector<double> edges{pts.front()};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = pts[i - 1], b = pts[i];
    const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / max_panel));
    for (std::size_t k = 1; k < pieces; ++k)
      edges.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(pieces));
    edges.push_back(b);
  }
  return edges;
}

[[noreturn]] inline void fail(double a, double b, double err, double tol) {
  std::ostringstream os;
  os << "adaptive quadrature on [" << a << ", " << b << "] did not converge: error estimate "
     << err << " > tolerance " << tol;
  throw QuadratureError(os.str());
}

} // namespace detail

/// Integrate a scalar function over [edges.front(), edges.back()], never
/// placing a node on an interior breakpoint (cusps, mode boundaries).
template <class F>
Result integrate(F&& f, std::span<const double> breakpoints, const Options& opt = {}) {
  struct Piece {
    double a, b, value, error;
  };
  Result out;
  const auto edges = detail::initial_edges(breakpoints, opt.max_panel);
  if (edges.size() < 2) {
    out.converged = true;
    return out;
  }
  std::vector<Piece> heap;
  heap.reserve(64);
  const auto by_error = [](const Piece& l, const Piece& r) { return l.error < r.error; };
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    Piece p{edges[i - 1], edges[i], 0.0, 0.0};
    p.error = detail::qk21_scalar(f, p.a, p.b, p.value);
    out.evaluations += 21;
    total += p.value;
    total_err += p.error;
    heap.push_back(p);
  }
  std::make_heap(heap.begin(), heap.end(), by_error);
  const auto tolerance = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };
  while (total_err > tolerance() && heap.size() < opt.max_intervals) {
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Piece worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;
    }
    Piece left{worst.a, mid, 0.0, 0.0}, right{mid, worst.b, 0.0, 0.0};
    left.error = detail::qk21_scalar(f, left.a, left.b, left.value);
    right.error = detail::qk21_scalar(f, right.a, right.b, right.value);
    out.evaluations += 42;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  total_err = 0.0;
  for (const auto& p : heap) {
    total += p.value;
    total_err += p.error;
  }
  out.value = total;
  out.error = total_err;
  out.converged = total_err <= tolerance();
  if (!out.converged && opt.throw_on_failure)
    detail::fail(edges.front(), edges.back(), total_err, tolerance());
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  const std::array<double, 2> ends{a, b};
  return integrate(std::forward<F>(f), std::span<const double>(ends), opt);
}

/// Integrate f: (x, out[dim]) over the breakpoint span; all components share
/// one subdivision. Tolerance is judged against the largest component.
template <class F>
VectorResult integrate_vector(F&& f, std::size_t dim, std::span<const double> breakpoints,
                              const Options& opt = {}) {
  struct Piece {
    double a, b, error;
    std::size_t slot; // offset into the value pool
  };
  VectorResult out;
  out.value.assign(dim, 0.0);
  const auto edges = detail::initial_edges(breakpoints, opt.max_panel);
  if (edges.size() < 2 || dim == 0) {
    out.converged = true;
    return out;
  }
  std::vector<double> pool;
  std::vector<std::size_t> free_slots;
  std::vector<double> scratch;
  const auto alloc = [&] {
    if (!free_slots.empty()) {
      const auto s = free_slots.back();
      free_slots.pop_back();
      return s;
    }
    const auto s = pool.size();
    pool.resize(pool.size() + dim);
    return s;
  };
  std::vector<Piece> heap;
  const auto by_error = [](const Piece& l, const Piece& r) { return l.error < r.error; };
  const auto eval = [&](double a, double b) {
    Piece p{a, b, 0.0, alloc()};
    p.error = detail::qk21_vector(f, dim, a, b, std::span<double>(pool.data() + p.slot, dim),
                                  scratch);
    out.evaluations += 21;
    return p;
  };
  double total_err = 0.0;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    heap.push_back(eval(edges[i - 1], edges[i]));
    total_err += heap.back().error;
  }
  std::make_heap(heap.begin(), heap.end(), by_error);
  const auto tolerance = [&] {
    std::fill(out.value.begin(), out.value.end(), 0.0);
    for (const auto& p : heap)
      for (std::size_t c = 0; c < dim; ++c) out.value[c] += pool[p.slot + c];
    double scale = 0.0;
    for (double v : out.value) scale = std::max(scale, std::abs(v));
    return std::max(opt.abs_tol, opt.rel_tol * scale);
  };
  double tol = tolerance();
  while (total_err > tol && heap.size() < opt.max_intervals) {
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const Piece worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), by_error);
      break;
    }
    free_slots.push_back(worst.slot);
    const Piece left = eval(worst.a, mid);
    const Piece right = eval(mid, worst.b);
    total_err += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
    // The relative tolerance only moves slowly; refresh it periodically.
    if (heap.size() % 16 == 0) tol = tolerance();
  }
  tol = tolerance();
  total_err = 0.0;
  for (const auto& p : heap) total_err += p.error;
  out.error = total_err;
  out.converged = total_err <= tol;
  if (!out.converged && opt.throw_on_failure)
    detail::fail(edges.front(), edges.back(), total_err, tol);
  return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the Legendre recurrence).
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(std::size_t n);

} // namespace spatent::quad
