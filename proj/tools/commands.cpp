#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/random/mersenne_twister.hpp>

#include "spatent/error.hpp"
#include "spatent/fock_oracle.hpp"
#include "spatent/specfun.hpp"
#include "spatent/sprdm.hpp"

#ifndef SPATENT_VERSION
#define SPATENT_VERSION "0.0.0"
#endif

namespace spatent::cli {
namespace {

std::vector<std::string> split(const std::string& text, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (seps.find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_real(const std::string& s, const char* what) {
  std::string t;
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(std::string("cannot parse ") + what + " '" + s + "'");
  return v;
}

std::string format_param(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
  return s;
}

std::string coupling_list(const std::vector<twoboson::Coupling>& gs) {
  std::vector<std::string> v;
  for (const auto& g : gs) v.push_back(g.to_string());
  return join(v);
}

std::string real_list(const std::vector<double>& xs) {
  std::vector<std::string> v;
  for (double x : xs) v.push_back(format_param(x));
  return join(v);
}

void header(std::ostream& out, const std::string& command, const RunConfig& cfg) {
  out << "# spatent " << SPATENT_VERSION << " " << command << "\n"
      << "# coupling: 1D contact strength in oscillator units (hbar = m = omega = 1); "
         "inf = hard-core limit\n"
      << "# coordinates: X = (x1 + x2)/sqrt(2), x = (x1 - x2)/sqrt(2)\n"
      << "# tolerances: correlator_abs=" << format_param(cfg.tol)
      << " inner_abs=" << format_param(cfg.tol * 1e-2)
      << " boltzmann_tail=" << format_param(sprdm::kDefaultTailTolerance) << "\n"
      << "# mode truncation X_max=" << format_param(cfg.truncation) << "\n";
}

modes::CorrelatorOptions correlator_options(const RunConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw ConfigError("--tol must be > 0");
  modes::CorrelatorOptions o;
  o.abs_tol = cfg.tol;
  o.inner_tol = cfg.tol * 1e-2;
  return o;
}

void require_nonempty(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string(what) + " must not be empty");
}

void check_temperatures(const std::vector<double>& Ts) {
  for (double T : Ts)
    if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("temperatures must be finite and >= 0");
}

} // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

RunConfig with_defaults(RunConfig cfg, const std::string& command) {
  const auto gs = [](std::initializer_list<const char*> xs) {
    std::vector<twoboson::Coupling> v;
    for (auto s : xs) v.push_back(twoboson::Coupling::parse(s));
    return v;
  };
  if (cfg.couplings.empty()) {
    if (command == "energies" || command == "multimode-scan")
      cfg.couplings = gs({"1"});
    else if (command == "trimode-sweep")
      cfg.couplings = gs({"0", "0.5", "1", "2", "5", "10", "20", "inf"});
    else
      cfg.couplings = gs({"0", "2", "5", "10", "inf"});
  }
  if (cfg.temperatures.empty()) {
    if (command == "bimode-sweep")
      for (int i = 0; i <= 10; ++i) cfg.temperatures.push_back(0.25 * i);
    else
      cfg.temperatures = {0.0};
  }
  if (command == "multimode-scan" && cfg.modes.empty()) cfg.modes = "split:-3:3:4";
  return cfg;
}

std::vector<twoboson::Coupling> parse_couplings(const std::vector<std::string>& items) {
  std::vector<twoboson::Coupling> out;
  for (const auto& item : items)
    for (const auto& s : split(item, ", "))
      try {
        out.push_back(twoboson::Coupling::parse(s));
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
  return out;
}

std::vector<double> parse_reals(const std::vector<std::string>& items, const char* what) {
  std::vector<double> out;
  for (const auto& item : items)
    for (const auto& s : split(item, ", ")) out.push_back(parse_real(s, what));
  return out;
}

modes::ModeSet parse_modes(const std::string& text, double truncation) {
  std::vector<modes::SpatialMode> ms;
  const auto items = split(text, "; \t\n");
  if (items.empty()) throw ConfigError("empty mode specification");
  for (const auto& item : items) {
    const auto f = split(item, ":");
    if (f.size() == 4 && f[0] == "split") {
      const double lo = parse_real(f[1], "mode bound");
      const double hi = parse_real(f[2], "mode bound");
      const double m = parse_real(f[3], "mode count");
      if (!(m >= 1.0) || m != std::floor(m) || m > 64)
        throw ConfigError("split mode count must be a positive integer");
      const auto part = modes::ModeSet::equal_split(lo, hi, static_cast<int>(m), truncation);
      ms.insert(ms.end(), part.begin(), part.end());
    } else if (f.size() == 2) {
      ms.emplace_back(parse_real(f[0], "mode bound"), parse_real(f[1], "mode bound"),
                      modes::Uniform{}, truncation);
    } else if (f.size() == 5 && f[2] == "gauss") {
      ms.emplace_back(parse_real(f[0], "mode bound"), parse_real(f[1], "mode bound"),
                      modes::Gaussian{parse_real(f[3], "centre"), parse_real(f[4], "width")},
                      truncation);
    } else {
      throw ConfigError("cannot parse mode '" + item + "'");
    }
  }
  return modes::ModeSet(std::move(ms));
}

void run_indexed(std::size_t count, const std::function<void(std::size_t)>& job) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
  } else {
    std::mutex m;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(m);
            if (next == count) return;
            i = next++;
          }
          try {
            job(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void cmd_energies(const RunConfig& cfg, std::ostream& out) {
  require_nonempty(!cfg.couplings.empty(), "coupling list");
  if (cfg.count < 1 || cfg.count > 1000) throw ConfigError("--count must lie in [1, 1000]");
  header(out, "energies", cfg);
  out << "g,nu,E_rel,residual\n";
  for (const auto& g : cfg.couplings) {
    const auto E = twoboson::solve_relative_energies(g, cfg.count);
    for (int k = 0; k < cfg.count; ++k) {
      double residual = 0.0;
      if (!g.is_infinite() && g.value() > 0.0) {
        const double delta = 1.5 + 2.0 * k - E[static_cast<std::size_t>(k)];
        residual = std::abs(specfun::gamma_energy_ratio_below_pole(k, delta) + g.value());
      }
      out << g.to_string() << "," << k << "," << format_real(E[static_cast<std::size_t>(k)]) << ","
          << format_real(residual) << "\n";
    }
  }
}

void cmd_bimode_sweep(const RunConfig& cfg, std::ostream& out) {
  require_nonempty(!cfg.couplings.empty(), "coupling list");
  require_nonempty(!cfg.temperatures.empty(), "temperature list");
  check_temperatures(cfg.temperatures);
  const auto opt = correlator_options(cfg);
  const auto ms = cfg.modes.empty() ? modes::ModeSet::symmetric_pair(cfg.half_length)
                                    : parse_modes(cfg.modes, cfg.truncation);
  if (ms.size() != 2) throw ConfigError("bimode-sweep needs exactly two modes");

  const std::size_t nT = cfg.temperatures.size();
  std::vector<modes::CorrelatorMatrix> cells(cfg.couplings.size() * nT);
  // one job per coupling so per-state correlators are shared across temperatures
  run_indexed(cfg.couplings.size(), [&](std::size_t gi) {
    const auto& g = cfg.couplings[gi];
    modes::StateCorrelatorCache cache(ms, opt);
    for (std::size_t ti = 0; ti < nT; ++ti) {
      const sprdm::SprdmEvaluator k(sprdm::build_ensemble(g, cfg.temperatures[ti]));
      cells[gi * nT + ti] = modes::correlator_matrix(cache, k, g.to_string());
    }
  });

  header(out, "bimode-sweep", cfg);
  out << "# modes: " << ms.describe() << "\n"
      << "# couplings: " << coupling_list(cfg.couplings) << "\n"
      << "# temperatures: " << real_list(cfg.temperatures) << "\n"
      << "# truncation_count: thermal eigenstates kept; residual Boltzmann weight below 1e-8\n"
      << "g,T,epsilon_abs,quad_err,truncation_count\n";
  for (std::size_t gi = 0; gi < cfg.couplings.size(); ++gi)
    for (std::size_t ti = 0; ti < nT; ++ti) {
      const auto& c = cells[gi * nT + ti];
      out << cfg.couplings[gi].to_string() << "," << format_param(cfg.temperatures[ti]) << ","
          << format_real(std::abs(c.M(0, 1))) << "," << format_real(c.quad_error) << ","
          << c.states << "\n";
    }
}

void cmd_trimode_sweep(const RunConfig& cfg, std::ostream& out) {
  require_nonempty(!cfg.couplings.empty(), "coupling list");
  require_nonempty(!cfg.central_lengths.empty(), "central length list");
  const auto opt = correlator_options(cfg);
  std::vector<modes::ModeSet> sets;
  for (double Lb : cfg.central_lengths) sets.push_back(modes::ModeSet::three_mode(Lb, cfg.truncation));

  const std::size_t nG = cfg.couplings.size();
  std::vector<modes::CorrelatorMatrix> cells(sets.size() * nG);
  run_indexed(cells.size(), [&](std::size_t idx) {
    const auto& g = cfg.couplings[idx % nG];
    const sprdm::SprdmEvaluator k(sprdm::build_ensemble(g, 0.0));
    cells[idx] = modes::correlator_matrix(sets[idx / nG], k, opt);
  });

  header(out, "trimode-sweep", cfg);
  out << "# modes: a=(-inf,-L_b/2) b=(-L_b/2,L_b/2) c=(L_b/2,inf), uniform weights, T=0\n"
      << "# couplings: " << coupling_list(cfg.couplings) << "\n"
      << "L_b,g,eps_ab,eps_bc,eps_ac\n";
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    const auto& c = cells[idx];
    const double ab = std::abs(c.M(0, 1));
    const double bc = std::abs(c.M(1, 2));
    const double slack = 10.0 * c.quad_error + 1e-12;
    if (std::abs(ab - bc) > slack) {
      std::ostringstream os;
      os << "mirror symmetry broken: eps_ab = " << format_real(ab)
         << ", eps_bc = " << format_real(bc) << " at L_b = " << cfg.central_lengths[idx / nG];
      throw ConvergenceError(os.str());
    }
    out << format_param(cfg.central_lengths[idx / nG]) << ","
        << cfg.couplings[idx % nG].to_string() << "," << format_real(ab) << "," << format_real(bc)
        << "," << format_real(std::abs(c.M(0, 2))) << "\n";
  }
}

bool cmd_multimode_scan(const RunConfig& cfg, std::ostream& out) {
  require_nonempty(!cfg.couplings.empty(), "coupling list");
  require_nonempty(!cfg.temperatures.empty(), "temperature list");
  check_temperatures(cfg.temperatures);
  if (!(cfg.threshold > 0.0)) throw ConfigError("--threshold must be > 0");
  const auto opt = correlator_options(cfg);
  const auto ms = parse_modes(cfg.modes, cfg.truncation);
  if (ms.size() < 2 || ms.size() > static_cast<std::size_t>(kMaxScanModes))
    throw ConfigError("multimode-scan needs 2 to " + std::to_string(kMaxScanModes) + " modes");

  const std::size_t nT = cfg.temperatures.size();
  std::vector<modes::SeparabilityReport> reports(cfg.couplings.size() * nT);
  run_indexed(cfg.couplings.size(), [&](std::size_t gi) {
    const auto& g = cfg.couplings[gi];
    modes::StateCorrelatorCache cache(ms, opt);
    for (std::size_t ti = 0; ti < nT; ++ti) {
      const sprdm::SprdmEvaluator k(sprdm::build_ensemble(g, cfg.temperatures[ti]));
      reports[gi * nT + ti] =
          modes::classify_separability(modes::correlator_matrix(cache, k, g.to_string()),
                                       cfg.threshold);
    }
  });

  const auto members = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
  };
  header(out, "multimode-scan", cfg);
  out << "# modes: " << ms.describe() << "\n"
      << "# threshold: " << format_param(cfg.threshold) << "\n"
      << "# value: largest singular value of the A x B block of the mode correlator matrix\n"
      << "g,T,split,A,B,value,margin,verdict\n";
  bool all_entangled = true;
  for (std::size_t gi = 0; gi < cfg.couplings.size(); ++gi)
    for (std::size_t ti = 0; ti < nT; ++ti) {
      const auto& rep = reports[gi * nT + ti];
      const auto verdict = modes::to_string(rep.verdict);
      all_entangled = all_entangled && rep.verdict == modes::Verdict::FullyEntangled;
      for (std::size_t i = 0; i < rep.values.size(); ++i) {
        const auto& v = rep.values[i];
        out << cfg.couplings[gi].to_string() << "," << format_param(cfg.temperatures[ti]) << ","
            << i << "," << members(v.split.A) << "," << members(v.split.B) << ","
            << format_real(v.value) << "," << format_real(v.margin) << "," << verdict << "\n";
      }
      std::vector<std::string> comps;
      for (const auto& c : rep.coherence_components) comps.push_back("{" + members(c) + "}");
      std::string vanishing;
      for (auto i : rep.vanishing) vanishing += (vanishing.empty() ? "" : " ") + std::to_string(i);
      out << "# verdict g=" << cfg.couplings[gi].to_string()
          << " T=" << format_param(cfg.temperatures[ti]) << ": " << verdict
          << " min_value=" << format_real(rep.min_value)
          << " min_margin=" << format_real(rep.min_value - rep.threshold)
          << " vanishing_splits=[" << vanishing << "] coherence_components=" << join(comps)
          << "\n";
    }
  return all_entangled;
}

void cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  if (cfg.max_particles < 1 || cfg.max_particles > fock::kMaxParticles)
    throw ConfigError("--N-max must lie in [1, " + std::to_string(fock::kMaxParticles) + "]");
  if (cfg.trials < 0) throw ConfigError("--trials must be >= 0");

  struct Tally {
    std::string kind;
    int N;
    std::size_t states = 0;
    double max_deviation = 0.0;
    double max_difference = 0.0;
    bool holds = true;
  };
  std::vector<Tally> rows;
  const auto record = [&](Tally& t, const fock::IdentityReport& r) {
    ++t.states;
    t.max_deviation = std::max(t.max_deviation, r.deviation);
    t.max_difference = std::max(t.max_difference, r.max_difference);
    t.holds = t.holds && r.holds;
  };

  for (int N = 1; N <= cfg.max_particles; ++N) {
    Tally t{"separable", N};
    for (const auto& p : fock::probability_grid(N, cfg.grid_resolution))
      record(t, fock::verify_identity(fock::separable_state(N, p)));
    rows.push_back(t);
  }
  for (int N = 2; N <= cfg.max_particles; N += 2) {
    // |N,0> + |0,N>: coherence only at order N
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(N + 1);
    v(0) = v(N) = std::sqrt(0.5);
    Tally t{"cat", N};
    record(t, fock::verify_identity(fock::TwoModeFockState::pure(N, v)));
    rows.push_back(t);
  }
  boost::random::mt19937_64 rng(cfg.seed);
  std::vector<Tally> random;
  for (int N = 1; N <= cfg.max_particles; ++N) random.push_back({"random", N});
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const int N = 1 + trial % cfg.max_particles;
    record(random[static_cast<std::size_t>(N - 1)],
           fock::verify_identity(fock::random_pure_state(N, rng)));
  }
  for (auto& t : random)
    if (t.states) rows.push_back(t);

  double worst = 0.0;
  bool holds = true;
  out << "# spatent " << SPATENT_VERSION << " oracle\n"
      << "# identity: max over phase |<n_c> - <n_d>| = 2 |<a^dag b>|, tolerance "
      << format_param(fock::kIdentityTolerance) << "\n"
      << "# seed=" << cfg.seed << " trials=" << cfg.trials << " N_max=" << cfg.max_particles
      << " grid_resolution=" << cfg.grid_resolution << "\n"
      << "kind,N,states,max_difference,max_deviation,holds\n";
  for (const auto& t : rows) {
    worst = std::max(worst, t.max_deviation);
    holds = holds && t.holds;
    out << t.kind << "," << t.N << "," << t.states << "," << format_real(t.max_difference) << ","
        << format_real(t.max_deviation) << "," << (t.holds ? "yes" : "no") << "\n";
  }
  out << "# max_deviation=" << format_real(worst) << "\n";
  if (!holds)
    throw IdentityViolation("beamsplitter identity violated, max deviation " + format_real(worst));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IdentityViolation*>(&e)) return kExitOracle;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e))
    return kExitConfig;
  return kExitNumerical;
}

} // namespace spatent::cli
