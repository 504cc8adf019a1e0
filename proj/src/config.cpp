#include "anchored/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anchored/csv.hpp"
#include "anchored/errors.hpp"

namespace anchored {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

[[noreturn]] void fail(long line_no, const std::string& what) {
  throw ConfigError("config: line " + std::to_string(line_no) + ": " + what);
}

// Strips a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

ConfigValue parse_scalar(const std::string& text, long line_no) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.size() >= 2 && text.front() == '"') {
    if (text.back() != '"' || text.size() < 2) {
      fail(line_no, "unterminated string: " + text);
    }
    return text.substr(1, text.size() - 2);
  }
  const char* begin = text.c_str();
  char* end = nullptr;
  const bool integral =
      text.find_first_of(".eE") == std::string::npos;
  if (integral) {
    const long v = std::strtol(begin, &end, 10);
    if (end != begin && *end == '\0') return v;
  }
  end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    fail(line_no, "cannot parse value: '" + text + "'");
  }
  return v;
}

ConfigValue parse_value(const std::string& text, long line_no) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') fail(line_no, "array does not close on the line");
    const std::string inner = trim(text.substr(1, text.size() - 2));
    if (inner.empty()) return std::vector<double>{};
    std::vector<ConfigValue> items;
    size_t start = 0;
    bool in_string = false;
    for (size_t i = 0; i <= inner.size(); ++i) {
      if (i < inner.size() && inner[i] == '"') in_string = !in_string;
      if (i == inner.size() || (inner[i] == ',' && !in_string)) {
        items.push_back(parse_scalar(trim(inner.substr(start, i - start)),
                                     line_no));
        start = i + 1;
      }
    }
    if (std::holds_alternative<std::string>(items.front())) {
      std::vector<std::string> out;
      for (auto& item : items) {
        if (!std::holds_alternative<std::string>(item)) {
          fail(line_no, "mixed array element types");
        }
        out.push_back(std::get<std::string>(item));
      }
      return out;
    }
    std::vector<double> out;
    for (auto& item : items) {
      if (std::holds_alternative<long>(item)) {
        out.push_back(static_cast<double>(std::get<long>(item)));
      } else if (std::holds_alternative<double>(item)) {
        out.push_back(std::get<double>(item));
      } else {
        fail(line_no, "mixed array element types");
      }
    }
    return out;
  }
  return parse_scalar(text, line_no);
}

std::string render_value(const ConfigValue& v) {
  struct Renderer {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(long n) const { return std::to_string(n); }
    std::string operator()(double d) const {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", d);
      return buf;
    }
    std::string operator()(const std::string& s) const {
      return '"' + s + '"';
    }
    std::string operator()(const std::vector<double>& a) const {
      std::string out = "[";
      for (size_t i = 0; i < a.size(); ++i) {
        if (i) out += ", ";
        out += (*this)(a[i]);
      }
      return out + "]";
    }
    std::string operator()(const std::vector<std::string>& a) const {
      std::string out = "[";
      for (size_t i = 0; i < a.size(); ++i) {
        if (i) out += ", ";
        out += (*this)(a[i]);
      }
      return out + "]";
    }
  };
  return std::visit(Renderer{}, v);
}

[[noreturn]] void key_fail(const std::string& section, const std::string& key,
                           const std::string& what) {
  throw ConfigError("config: [" + section + "]." + key + ": " + what);
}

const ConfigValue* find(const RawConfig& raw, const std::string& section,
                        const std::string& key) {
  const auto sit = raw.sections.find(section);
  if (sit == raw.sections.end()) return nullptr;
  const auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  return &kit->second;
}

const ConfigValue& require(const RawConfig& raw, const std::string& section,
                           const std::string& key) {
  const ConfigValue* v = find(raw, section, key);
  if (!v) key_fail(section, key, "missing");
  return *v;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

bool RawConfig::has(const std::string& section, const std::string& key) const {
  return find(*this, section, key) != nullptr;
}

double RawConfig::number(const std::string& section,
                         const std::string& key) const {
  const ConfigValue& v = require(*this, section, key);
  if (std::holds_alternative<long>(v)) {
    return static_cast<double>(std::get<long>(v));
  }
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  key_fail(section, key, "expected a number");
}

double RawConfig::number_or(const std::string& section, const std::string& key,
                            double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

long RawConfig::integer(const std::string& section,
                        const std::string& key) const {
  const ConfigValue& v = require(*this, section, key);
  if (std::holds_alternative<long>(v)) return std::get<long>(v);
  if (std::holds_alternative<double>(v)) {
    const double d = std::get<double>(v);
    if (d == std::floor(d) && std::abs(d) <= 9007199254740992.0) {
      return static_cast<long>(d);
    }
  }
  key_fail(section, key, "expected an integer");
}

long RawConfig::integer_or(const std::string& section, const std::string& key,
                           long fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

bool RawConfig::flag_or(const std::string& section, const std::string& key,
                        bool fallback) const {
  const ConfigValue* v = find(*this, section, key);
  if (!v) return fallback;
  if (std::holds_alternative<bool>(*v)) return std::get<bool>(*v);
  key_fail(section, key, "expected true or false");
}

std::string RawConfig::text(const std::string& section,
                            const std::string& key) const {
  const ConfigValue& v = require(*this, section, key);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  key_fail(section, key, "expected a string");
}

std::string RawConfig::text_or(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? text(section, key) : fallback;
}

std::vector<double> RawConfig::numbers(const std::string& section,
                                       const std::string& key) const {
  const ConfigValue& v = require(*this, section, key);
  if (std::holds_alternative<std::vector<double>>(v)) {
    return std::get<std::vector<double>>(v);
  }
  key_fail(section, key, "expected an array of numbers");
}

std::vector<std::string> RawConfig::texts(const std::string& section,
                                          const std::string& key) const {
  const ConfigValue& v = require(*this, section, key);
  if (std::holds_alternative<std::vector<std::string>>(v)) {
    return std::get<std::vector<std::string>>(v);
  }
  key_fail(section, key, "expected an array of strings");
}

std::string RawConfig::canonical() const {
  std::string out;
  for (const auto& [section, keys] : sections) {
    for (const auto& [key, value] : keys) {
      out += section + "." + key + " = " + render_value(value) + "\n";
    }
  }
  return out;
}

std::string RawConfig::digest() const {
  const std::string text = canonical();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void RawConfig::set(const std::string& section, const std::string& key,
                    const std::string& literal) {
  if (!valid_name(section) || !valid_name(key)) {
    throw ConfigError("config: bad key name: [" + section + "]." + key);
  }
  sections[section][key] = parse_value(trim(literal), 0);
}

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  std::istringstream is(text);
  std::string line;
  std::string section;
  long line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) {
        fail(line_no, "bad section name: '" + section + "'");
      }
      raw.sections[section];  // a section may be empty
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(line_no, "expected key = value, got: '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) fail(line_no, "bad key name: '" + key + "'");
    if (section.empty()) {
      fail(line_no, "key '" + key + "' appears before any [section]");
    }
    if (raw.sections[section].count(key)) {
      fail(line_no, "duplicate key [" + section + "]." + key);
    }
    raw.sections[section][key] =
        parse_value(trim(line.substr(eq + 1)), line_no);
  }
  return raw;
}

RawConfig parse_config_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config: cannot open: " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  RawConfig raw = parse_config_text(buffer.str());
  const auto parent = std::filesystem::path(path).parent_path();
  raw.base_dir = parent.empty() ? "." : parent.string();
  return raw;
}

namespace {

std::string data_path(const RawConfig& raw, const std::string& file) {
  std::filesystem::path p(file);
  if (p.is_absolute()) return file;
  return (std::filesystem::path(raw.base_dir) / p).string();
}

Problem resolve_problem(const RawConfig& raw) {
  const std::string family = raw.text("problem", "family");
  try {
    if (family == "quadratic") {
      Eigen::MatrixXd q;
      if (raw.has("problem", "matrix_file")) {
        q = read_matrix_csv_file(
            data_path(raw, raw.text("problem", "matrix_file")));
      } else {
        const Eigen::VectorXd diag = to_eigen(raw.numbers("problem", "diag"));
        q = diag.asDiagonal();
      }
      Eigen::VectorXd c;
      if (raw.has("problem", "vector_file")) {
        c = read_vector_csv_file(
            data_path(raw, raw.text("problem", "vector_file")));
      } else if (raw.has("problem", "c")) {
        c = to_eigen(raw.numbers("problem", "c"));
      } else {
        c = Eigen::VectorXd::Zero(q.rows());
      }
      return make_quadratic(q, c);
    }
    if (family == "least_squares" || family == "logistic") {
      const Eigen::MatrixXd a = read_matrix_csv_file(
          data_path(raw, raw.text("problem", "data_file")));
      const Eigen::VectorXd y = read_vector_csv_file(
          data_path(raw, raw.text("problem", "labels_file")));
      return family == "least_squares" ? make_least_squares(a, y)
                                       : make_logistic(a, y);
    }
    if (family == "rastrigin") {
      return make_rastrigin(raw.integer("problem", "dimension"));
    }
    if (family == "rosenbrock") {
      return make_rosenbrock(raw.integer("problem", "dimension"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: [problem]: " + std::string(e.what()));
  }
  key_fail("problem", "family", "unknown family: '" + family + "'");
}

AffineOperator resolve_operator(const RawConfig& raw) {
  const std::string kind = raw.text("operator", "kind");
  try {
    if (kind == "rotation") {
      double angle;
      if (raw.has("operator", "angle_deg")) {
        angle = raw.number("operator", "angle_deg") * M_PI / 180.0;
      } else {
        angle = raw.number("operator", "angle");
      }
      return make_rotation(angle);
    }
    if (kind == "matrix") {
      const Eigen::MatrixXd m = read_matrix_csv_file(
          data_path(raw, raw.text("operator", "matrix_file")));
      Eigen::VectorXd offset = Eigen::VectorXd::Zero(m.rows());
      if (raw.has("operator", "offset")) {
        offset = to_eigen(raw.numbers("operator", "offset"));
      }
      return AffineOperator(m, offset,
                            raw.text_or("operator", "id", "affine"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: [operator]: " + std::string(e.what()));
  }
  key_fail("operator", "kind", "unknown kind: '" + kind + "'");
}

Schedule resolve_schedule(const RawConfig& raw) {
  const std::string kind = raw.text_or("schedule", "kind", "power_law");
  try {
    if (kind == "power_law") {
      return Schedule{PowerLawSchedule(
          raw.number_or("schedule", "a", 1.0), raw.number("schedule", "p"),
          raw.number_or("schedule", "e", 1.0), raw.number("schedule", "q"),
          raw.integer_or("schedule", "n0", 2))};
    }
    if (kind == "constant") {
      const std::string alpha = raw.text_or("schedule", "alpha", "zero");
      AlphaRule rule;
      if (alpha == "zero") {
        rule = AlphaRule::Zero;
      } else if (alpha == "classic") {
        rule = AlphaRule::Classic;
      } else {
        key_fail("schedule", "alpha", "expected \"zero\" or \"classic\"");
      }
      return Schedule{
          ConstantStepSchedule(raw.number("schedule", "eta"), rule)};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: [schedule]: " + std::string(e.what()));
  }
  key_fail("schedule", "kind", "unknown kind: '" + kind + "'");
}

NoiseModel resolve_noise(const RawConfig& raw,
                         const std::optional<Problem>& problem) {
  const std::string kind = raw.text_or("noise", "kind", "zero");
  try {
    if (kind == "zero") return NoiseModel::zero();
    if (kind == "gaussian_iso") {
      return NoiseModel::gaussian_iso(raw.number("noise", "sigma"));
    }
    if (kind == "bounded_uniform") {
      return NoiseModel::bounded_uniform(raw.number("noise", "sigma"));
    }
    if (kind == "rademacher") {
      return NoiseModel::rademacher(raw.number("noise", "sigma"));
    }
    if (kind == "mini_batch") {
      if (!problem) {
        key_fail("noise", "kind", "mini_batch needs a [problem] section");
      }
      return NoiseModel::mini_batch(std::make_shared<const Problem>(*problem),
                                    raw.integer("noise", "batch"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("config: [noise]: " + std::string(e.what()));
  }
  key_fail("noise", "kind", "unknown kind: '" + kind + "'");
}

Method parse_method(const std::string& name) {
  try {
    return method_from_name(name);
  } catch (const std::exception& e) {
    throw ConfigError("config: [run].method: " + std::string(e.what()));
  }
}

}  // namespace

double ResolvedRun::lipschitz() const {
  if (lipschitz_override) return *lipschitz_override;
  if (problem) return problem->lipschitz;
  return 0.0;
}

RunSpec ResolvedRun::base_run_spec() const {
  RunSpec spec;
  spec.method = method;
  spec.schedule = schedule;
  spec.noise = noise;
  spec.u = u;
  spec.horizon = horizon;
  spec.km_lambda = km_lambda;
  spec.override_schedule = override_schedule;
  return spec;
}

ResolvedRun resolve_run(const RawConfig& raw) {
  ResolvedRun r;

  if (raw.sections.count("problem")) r.problem = resolve_problem(raw);
  if (raw.sections.count("operator")) r.op = resolve_operator(raw);

  if (raw.has("run", "methods")) {
    for (const auto& name : raw.texts("run", "methods")) {
      r.methods.push_back(parse_method(name));
    }
    if (r.methods.empty()) key_fail("run", "methods", "empty list");
    r.method = r.methods.front();
    if (raw.has("run", "method")) {
      r.method = parse_method(raw.text("run", "method"));
    }
  } else {
    r.method = parse_method(raw.text("run", "method"));
    r.methods = {r.method};
  }

  r.horizon = raw.integer("run", "horizon");
  if (r.horizon < 0) key_fail("run", "horizon", "must be >= 0");
  r.out_dir = raw.text_or("run", "out", "anchored_out");
  const long master = raw.integer_or("run", "master_seed", 42);
  if (master < 0) key_fail("run", "master_seed", "must be >= 0");
  r.master_seed = static_cast<std::uint64_t>(master);
  r.override_schedule = raw.flag_or("run", "override_schedule", false);
  r.km_lambda = raw.number_or("run", "km_lambda", 0.5);

  if (raw.has("run", "seed_list")) {
    for (double v : raw.numbers("run", "seed_list")) {
      if (v < 0 || v != std::floor(v)) {
        key_fail("run", "seed_list", "entries must be nonnegative integers");
      }
      r.stream_ids.push_back(static_cast<std::uint64_t>(v));
    }
    if (r.stream_ids.empty()) key_fail("run", "seed_list", "empty list");
  } else {
    const long count = raw.integer_or("run", "seeds", 1);
    if (count < 1) key_fail("run", "seeds", "must be >= 1");
    for (long i = 0; i < count; ++i) {
      r.stream_ids.push_back(r.master_seed + static_cast<std::uint64_t>(i));
    }
  }

  r.schedule = resolve_schedule(raw);
  if (raw.has("schedule", "lipschitz")) {
    r.lipschitz_override = raw.number("schedule", "lipschitz");
  }
  r.noise = resolve_noise(raw, r.problem);
  r.noise_check_samples = raw.integer_or("noise", "samples", 100000);

  if (raw.has("anchor", "u")) r.u = to_eigen(raw.numbers("anchor", "u"));
  if (raw.has("anchor", "x0")) r.x0 = to_eigen(raw.numbers("anchor", "x0"));
  r.x0_radius = raw.number_or("anchor", "x0_radius", 10.0);
  if (!(r.x0_radius > 0.0)) key_fail("anchor", "x0_radius", "must be > 0");

  return r;
}

}  // namespace anchored
