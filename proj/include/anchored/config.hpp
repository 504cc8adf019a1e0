#pragma once

// Experiment configs. The on-disk format is a small TOML-style text file:
// [section] headers, key = value lines, # comments, values being numbers,
// "strings", booleans, or single-line arrays. A parsed config resolves to a
// fully deterministic experiment; the digest identifies the resolved
// settings, so two files that differ only in comments or key order hash the
// same. All lookup and resolution failures throw ConfigError naming the
// offending [section].key.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "anchored/noise.hpp"
#include "anchored/optimizers.hpp"
#include "anchored/problems.hpp"
#include "anchored/schedules.hpp"

namespace anchored {

using ConfigValue = std::variant<bool, long, double, std::string,
                                 std::vector<double>, std::vector<std::string>>;

struct RawConfig {
  std::map<std::string, std::map<std::string, ConfigValue>> sections;
  std::string base_dir = ".";  // relative data-file paths resolve against it

  bool has(const std::string& section, const std::string& key) const;

  // Typed getters; the _or forms return the fallback when the key is absent.
  // Type mismatches always throw.
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key,
                   double fallback) const;
  long integer(const std::string& section, const std::string& key) const;
  long integer_or(const std::string& section, const std::string& key,
                  long fallback) const;
  bool flag_or(const std::string& section, const std::string& key,
               bool fallback) const;
  std::string text(const std::string& section, const std::string& key) const;
  std::string text_or(const std::string& section, const std::string& key,
                      const std::string& fallback) const;
  std::vector<double> numbers(const std::string& section,
                              const std::string& key) const;
  std::vector<std::string> texts(const std::string& section,
                                 const std::string& key) const;

  // Canonical form: sorted section.key = value lines, numbers at full
  // precision. Comments and ordering do not survive, so the FNV-1a digest
  // below identifies the settings, not the file bytes.
  std::string canonical() const;
  std::string digest() const;  // 16 hex characters

  // Sets key to a value parsed with the same rules as a config file line
  // (sweeps and command-line overrides reuse this).
  void set(const std::string& section, const std::string& key,
           const std::string& literal);
};

RawConfig parse_config_text(const std::string& text);
RawConfig parse_config_file(const std::string& path);

// A config resolved into domain objects. Exactly one of problem / op is
// set, chosen by [problem] / [operator]; which one a command needs is
// checked by the command itself.
struct ResolvedRun {
  std::optional<Problem> problem;
  std::optional<AffineOperator> op;
  Method method = Method::GD;
  std::vector<Method> methods;  // [run] methods list; defaults to {method}
  Schedule schedule{ConstantStepSchedule(1.0, AlphaRule::Zero)};
  NoiseModel noise;
  Eigen::VectorXd u;
  std::optional<Eigen::VectorXd> x0;  // absent: sphere policy around u
  double x0_radius = 10.0;
  long horizon = 0;
  std::uint64_t master_seed = 42;
  std::vector<std::uint64_t> stream_ids;  // resolved seed streams, in order
  std::string out_dir = "anchored_out";
  bool override_schedule = false;
  double km_lambda = 0.5;
  // [schedule] lipschitz, for validating a schedule with no problem present;
  // otherwise the problem's constant is used.
  std::optional<double> lipschitz_override;
  long noise_check_samples = 100000;

  double lipschitz() const;  // override, else problem's, else 0 (operator)
  RunSpec base_run_spec() const;
};

ResolvedRun resolve_run(const RawConfig& raw);

}  // namespace anchored
