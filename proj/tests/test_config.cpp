#include "anchored/config.hpp"

#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "anchored/errors.hpp"

using anchored::ConfigError;
using anchored::ConstantStepSchedule;
using anchored::Method;
using anchored::NoiseKind;
using anchored::PowerLawSchedule;
using anchored::RawConfig;
using anchored::ResolvedRun;
using anchored::Schedule;

namespace {

const char* kFullConfig = R"(
# experiment: anchored stochastic run on a tilted quadratic
[run]
method = "halpern_sgd"
horizon = 1000
seeds = 8
master_seed = 7       # streams 7..14
override_schedule = false

[schedule]
kind = "power_law"
p = 0.9
q = 0.6               # a, e default to 1, n0 to 2

[noise]
kind = "gaussian_iso"
sigma = 1.0

[problem]
family = "quadratic"
diag = [1, 0]

[anchor]
u = [3.0, 4.0]
x0 = [5, -1]
)";

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "anchored_cfg";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream os(path, std::ios::binary);
  os << content;
  return path;
}

}  // namespace

TEST_CASE("config: parser handles the value forms") {
  auto raw = anchored::parse_config_text(R"(
[a]
flag = true          # comment after value
count = 42
rate = 2.5e-3
name = "hash # inside string"
empty = []
coords = [1, 2.5, -3]
words = ["x", "y"]
[b]
big = 100000
)");
  CHECK(raw.has("a", "flag"));
  CHECK_FALSE(raw.has("a", "nope"));
  CHECK(raw.flag_or("a", "flag", false) == true);
  CHECK(raw.flag_or("a", "missing", true) == true);
  CHECK(raw.integer("a", "count") == 42);
  CHECK(raw.number("a", "count") == 42.0);
  CHECK(raw.number("a", "rate") == 2.5e-3);
  CHECK(raw.text("a", "name") == "hash # inside string");
  CHECK(raw.numbers("a", "empty").empty());
  CHECK(raw.numbers("a", "coords") == std::vector<double>{1.0, 2.5, -3.0});
  CHECK(raw.texts("a", "words") == std::vector<std::string>{"x", "y"});
  CHECK(raw.integer("b", "big") == 100000);
}

TEST_CASE("config: integers may be written in float notation") {
  auto raw = anchored::parse_config_text("[run]\nhorizon = 1e5\nbad = 1.5\n");
  CHECK(raw.integer("run", "horizon") == 100000);
  CHECK_THROWS_AS(raw.integer("run", "bad"), ConfigError);
}

TEST_CASE("config: parser names the offending line") {
  CHECK_THROWS_AS(anchored::parse_config_text("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a]\nx = 1\nx = 2\n"),
                  ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a]\nx 1\n"), ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a]\nx = \"open\n"),
                  ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a]\nx = [1, 2\n"),
                  ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a]\nx = [1, \"y\"]\n"),
                  ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a]\nx = what\n"), ConfigError);
  CHECK_THROWS_AS(anchored::parse_config_text("[a\nx = 1\n"), ConfigError);

  // Typed getters name the key.
  auto raw = anchored::parse_config_text("[a]\nx = 1\n");
  try {
    raw.text("a", "x");
    FAIL("expected a throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("[a].x") != std::string::npos);
  }
  CHECK_THROWS_AS(raw.number("a", "missing"), ConfigError);
}

TEST_CASE("config: digest tracks settings, not formatting") {
  auto a = anchored::parse_config_text(
      "[run]\nhorizon = 100\nmethod = \"gd\"\n# note\n[anchor]\nu = [1, 2]\n");
  auto b = anchored::parse_config_text(
      "[anchor]\nu = [1.0, 2.0]   # same vector\n"
      "[run]\nmethod = \"gd\"\nhorizon = 100\n");
  CHECK(a.digest() == b.digest());

  auto c = b;
  c.set("run", "horizon", "101");
  CHECK(c.digest() != b.digest());
  CHECK(c.integer("run", "horizon") == 101);

  // set() parses like a file line.
  c.set("anchor", "u", "[3, -7]");
  CHECK(c.numbers("anchor", "u") == std::vector<double>{3.0, -7.0});
}

TEST_CASE("config: a full run config resolves to domain objects") {
  auto raw = anchored::parse_config_text(kFullConfig);
  ResolvedRun r = anchored::resolve_run(raw);

  REQUIRE(r.problem.has_value());
  CHECK_FALSE(r.op.has_value());
  CHECK(r.problem->dimension == 2);
  CHECK(r.method == Method::HalpernSGD);
  CHECK(r.methods == std::vector<Method>{Method::HalpernSGD});
  CHECK(r.horizon == 1000);
  CHECK(r.master_seed == 7);
  REQUIRE(r.stream_ids.size() == 8);
  CHECK(r.stream_ids.front() == 7);
  CHECK(r.stream_ids.back() == 14);
  REQUIRE(std::holds_alternative<PowerLawSchedule>(r.schedule));
  const auto& sched = std::get<PowerLawSchedule>(r.schedule);
  CHECK(sched.alpha_at(0) == std::pow(2.0, -0.9));
  CHECK(r.noise.kind == NoiseKind::GaussianIso);
  CHECK(r.noise.sigma == 1.0);
  CHECK(r.u == Eigen::Vector2d(3.0, 4.0));
  REQUIRE(r.x0.has_value());
  CHECK(*r.x0 == Eigen::Vector2d(5.0, -1.0));
  CHECK(r.lipschitz() == 1.0);
  CHECK(r.out_dir == "anchored_out");

  auto spec = r.base_run_spec();
  CHECK(spec.method == Method::HalpernSGD);
  CHECK(spec.horizon == 1000);
}

TEST_CASE("config: resolution failures name the missing key") {
  // The q-less schedule is the canonical malformed config.
  auto raw = anchored::parse_config_text(
      "[run]\nmethod = \"sgd\"\nhorizon = 10\n"
      "[schedule]\nkind = \"power_law\"\np = 0.9\n"
      "[problem]\nfamily = \"quadratic\"\ndiag = [1]\n"
      "[anchor]\nu = [0]\n");
  try {
    anchored::resolve_run(raw);
    FAIL("expected a throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(".q") != std::string::npos);
  }

  auto bad_method = anchored::parse_config_text(
      "[run]\nmethod = \"adam\"\nhorizon = 10\n"
      "[schedule]\nkind = \"constant\"\neta = 0.1\n");
  CHECK_THROWS_AS(anchored::resolve_run(bad_method), ConfigError);

  auto bad_family = anchored::parse_config_text(
      "[run]\nmethod = \"gd\"\nhorizon = 10\n"
      "[schedule]\nkind = \"constant\"\neta = 0.1\n"
      "[problem]\nfamily = \"cubic\"\n");
  CHECK_THROWS_AS(anchored::resolve_run(bad_family), ConfigError);

  auto bad_horizon = anchored::parse_config_text(
      "[run]\nmethod = \"gd\"\nhorizon = -1\n"
      "[schedule]\nkind = \"constant\"\neta = 0.1\n");
  CHECK_THROWS_AS(anchored::resolve_run(bad_horizon), ConfigError);

  auto bad_seeds = anchored::parse_config_text(
      "[run]\nmethod = \"gd\"\nhorizon = 1\nseed_list = [1.5]\n"
      "[schedule]\nkind = \"constant\"\neta = 0.1\n");
  CHECK_THROWS_AS(anchored::resolve_run(bad_seeds), ConfigError);
}

TEST_CASE("config: explicit seed list and method list") {
  auto raw = anchored::parse_config_text(
      "[run]\nmethods = [\"gd\", \"halpern_gd\"]\nhorizon = 5\n"
      "seed_list = [3, 9, 27]\n"
      "[schedule]\nkind = \"constant\"\neta = 0.1\nalpha = \"classic\"\n"
      "[problem]\nfamily = \"rastrigin\"\ndimension = 2\n"
      "[anchor]\nu = [0, 0]\n");
  ResolvedRun r = anchored::resolve_run(raw);
  CHECK(r.methods == std::vector<Method>{Method::GD, Method::HalpernGD});
  CHECK(r.method == Method::GD);
  CHECK(r.stream_ids == std::vector<std::uint64_t>{3, 9, 27});
  REQUIRE(std::holds_alternative<ConstantStepSchedule>(r.schedule));
  CHECK(r.problem->family == "rastrigin");
}

TEST_CASE("config: operator section resolves a rotation") {
  auto raw = anchored::parse_config_text(
      "[run]\nmethod = \"halpern_operator\"\nhorizon = 10\n"
      "[schedule]\nkind = \"constant\"\neta = 1.0\nalpha = \"classic\"\n"
      "[operator]\nkind = \"rotation\"\nangle_deg = 90\n"
      "[anchor]\nu = [1, 0]\n");
  ResolvedRun r = anchored::resolve_run(raw);
  REQUIRE(r.op.has_value());
  CHECK_FALSE(r.problem.has_value());
  CHECK(r.op->matrix(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.op->matrix(1, 0) == doctest::Approx(1.0));
  CHECK(r.lipschitz() == 0.0);
  CHECK(r.methods == std::vector<Method>{Method::HalpernOperator});
}

TEST_CASE("config: data files resolve relative to the config file") {
  write_temp("A.csv", "1,0\n0,2\n1,1\n");
  write_temp("y.csv", "1\n-1\n0.5\n");
  const auto cfg_path = write_temp(
      "ls.toml",
      "[run]\nmethod = \"sgd\"\nhorizon = 4\n"
      "[schedule]\nkind = \"power_law\"\np = 0.9\nq = 0.6\n"
      "[noise]\nkind = \"mini_batch\"\nbatch = 2\n"
      "[problem]\nfamily = \"least_squares\"\ndata_file = \"A.csv\"\n"
      "labels_file = \"y.csv\"\n"
      "[anchor]\nu = [0, 0]\n");
  auto raw = anchored::parse_config_file(cfg_path.string());
  ResolvedRun r = anchored::resolve_run(raw);
  REQUIRE(r.problem.has_value());
  CHECK(r.problem->dimension == 2);
  CHECK(r.problem->num_terms == 3);
  CHECK(r.noise.kind == NoiseKind::MiniBatch);
  CHECK(r.noise.batch_size == 2);
  REQUIRE(r.noise.finite_sum != nullptr);

  CHECK_THROWS_AS(anchored::parse_config_file("/nonexistent/x.toml"),
                  ConfigError);
}
