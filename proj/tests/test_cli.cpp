#include <doctest.h>

#include <sstream>
#include <string>

#include "commands.hpp"
#include "spatent/error.hpp"

using namespace spatent;
using namespace spatent::cli;

namespace {

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(f);
  return out;
}

RunConfig config_for(const std::string& command) {
  return with_defaults(RunConfig{}, command);
}

} // namespace

TEST_CASE("energies command") {
  auto cfg = config_for("energies");
  cfg.couplings = parse_couplings({"0"});
  std::ostringstream out;
  cmd_energies(cfg, out);
  const auto rows = data_rows(out.str());
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(fields(rows[0])[2]) == 0.5);
  CHECK(std::stod(fields(rows[2])[2]) == 4.5);

  cfg.couplings = parse_couplings({"inf"});
  cfg.count = 2;
  std::ostringstream hard;
  cmd_energies(cfg, hard);
  CHECK(std::stod(fields(data_rows(hard.str())[1])[2]) == 3.5);

  cfg.couplings = parse_couplings({"2"});
  cfg.count = 1;
  std::ostringstream two;
  cmd_energies(cfg, two);
  const auto f = fields(data_rows(two.str())[0]);
  CHECK(std::abs(std::stod(f[2]) - 1.083898122276312682234) <= 1e-13);
  CHECK(std::stod(f[3]) <= 1e-9);
}

TEST_CASE("CSV formatting keeps full precision") {
  const std::string s = format_real(0.1);
  CHECK(std::stod(s) == 0.1);
  std::size_t digits = 0;
  for (char c : s.substr(0, s.find('e')))
    if (std::isdigit(static_cast<unsigned char>(c))) ++digits;
  CHECK(digits >= 12);
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("bimode sweep layout") {
  auto cfg = config_for("bimode-sweep");
  cfg.couplings = parse_couplings({"0,inf"});
  cfg.temperatures = parse_reals({"0,0.5,1"}, "T");
  std::ostringstream out;
  cmd_bimode_sweep(cfg, out);
  const std::string csv = out.str();
  CHECK(csv.find("# modes: [-2,0]:uniform;[0,2]:uniform") != std::string::npos);
  CHECK(csv.find("g,T,epsilon_abs,quad_err,truncation_count") != std::string::npos);
  const auto rows = data_rows(csv);
  REQUIRE(rows.size() == 6);
  CHECK(fields(rows[0])[0] == "0");
  CHECK(fields(rows[3])[0] == "inf");
  CHECK(fields(rows[0])[4] == "1");
  CHECK(std::stoi(fields(rows[2])[4]) > 1);
  CHECK(std::abs(std::stod(fields(rows[0])[2]) - 0.40370727003363896175) <= 1e-10);
}

TEST_CASE("default sweeps") {
  const auto bi = config_for("bimode-sweep");
  CHECK(bi.couplings.size() == 5);
  CHECK(bi.temperatures.size() == 11);
  CHECK(bi.half_length == 2.0);
  const auto tri = config_for("trimode-sweep");
  CHECK(tri.couplings.size() == 8);
  CHECK(tri.central_lengths == std::vector<double>{4.0, 2.8, 1.4});
}

TEST_CASE("trimode sweep is mirror symmetric") {
  auto cfg = config_for("trimode-sweep");
  cfg.couplings = parse_couplings({"0", "5"});
  cfg.central_lengths = {2.0};
  std::ostringstream out;
  cmd_trimode_sweep(cfg, out);
  const auto rows = data_rows(out.str());
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    const auto f = fields(r);
    CHECK(std::stod(f[2]) == doctest::Approx(std::stod(f[3])).epsilon(1e-12));
  }
}

TEST_CASE("multimode scan") {
  auto cfg = config_for("multimode-scan");
  cfg.couplings = parse_couplings({"1"});
  std::ostringstream out;
  CHECK(cmd_multimode_scan(cfg, out));
  CHECK(data_rows(out.str()).size() == 7);
  CHECK(out.str().find("FullyEntangled") != std::string::npos);

  cfg.threshold = 10.0;
  std::ostringstream high;
  CHECK_FALSE(cmd_multimode_scan(cfg, high));
  CHECK(high.str().find("vanishing_splits=[0 1 2 3 4 5 6]") != std::string::npos);

  cfg.modes = "split:-3:3:13";
  std::ostringstream too_many;
  CHECK_THROWS_AS(cmd_multimode_scan(cfg, too_many), ConfigError);
}

TEST_CASE("oracle command") {
  auto cfg = config_for("oracle");
  std::ostringstream a, b;
  cmd_oracle(cfg, a);
  cmd_oracle(cfg, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find(",no") == std::string::npos);

  cfg.trials = 0;
  std::ostringstream sep;
  cmd_oracle(cfg, sep);
  CHECK(sep.str().find("random") == std::string::npos);
  for (const auto& row : data_rows(sep.str())) CHECK(std::stod(fields(row)[3]) <= 1e-12);

  cfg.seed = 99;
  cfg.trials = 20;
  std::ostringstream other;
  cmd_oracle(cfg, other);
  CHECK(other.str() != a.str());
}

TEST_CASE("mode literals") {
  const auto ms = parse_modes("-inf:-1; -1:1:gauss:0:0.5 1:inf", 8.0);
  REQUIRE(ms.size() == 3);
  CHECK(ms[0].lo() == -8.0);
  CHECK(std::holds_alternative<modes::Gaussian>(ms[1].weight()));
  CHECK(parse_modes("split:0:2:4", 8.0).size() == 4);
  CHECK_THROWS_AS(parse_modes("", 8.0), ConfigError);
  CHECK_THROWS_AS(parse_modes("0:1:2", 8.0), ConfigError);
  CHECK_THROWS_AS(parse_modes("0:x", 8.0), ConfigError);
  CHECK_THROWS_AS(parse_modes("0:1;0.5:2", 8.0), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
  CHECK(exit_code_for(DomainError("x")) == kExitConfig);
  CHECK(exit_code_for(QuadratureError("x")) == kExitNumerical);
  CHECK(exit_code_for(ConvergenceError("x")) == kExitNumerical);
  CHECK(exit_code_for(IdentityViolation("x")) == kExitOracle);
  CHECK_THROWS_AS(parse_couplings({"0,-2"}), ConfigError);
  CHECK_THROWS_AS(parse_reals({"1,z"}, "T"), ConfigError);
}

TEST_CASE("worker pool keeps index order and reports the first failure") {
  std::vector<int> out(16, -1);
  run_indexed(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_WITH(run_indexed(5,
                                [](std::size_t i) {
                                  if (i >= 2) throw ConfigError("job " + std::to_string(i));
                                }),
                    "job 2");
}
