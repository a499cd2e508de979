#include "benjctl/app/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "benjctl/errors.hpp"

namespace benjctl::app {
namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "system.alpha", "system.mu", "system.mu_from_mean",
      "discretization.n", "discretization.n_sim",
      "control.T", "control.s", "control.samples_t", "control.quadrature",
      "output.samples_x",
      "bump.kind", "bump.center", "bump.width", "bump.coefficients", "bump.coefficients_file",
      "initial.kind", "initial.seed", "initial.s", "initial.norm", "initial.mean", "initial.mode",
      "initial.amplitude", "initial.coefficients", "initial.file",
      "target.kind", "target.seed", "target.s", "target.norm", "target.mean", "target.mode",
      "target.amplitude", "target.coefficients", "target.file",
      "simulate.law", "simulate.lambda", "simulate.T", "simulate.t_end", "simulate.samples", "simulate.s",
      "stabilize.law", "stabilize.lambda", "stabilize.T", "stabilize.t_end", "stabilize.samples", "stabilize.s",
      "stabilize.energy_samples",
      "observability.T",
      "experiment.kind", "experiment.seed", "experiment.out",
      "sweep.workers", "sweep.experiment",
  };
  return keys;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ValidationError(key + ": " + what);
}

std::optional<double> plain_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// "x", "pi", "-pi", "x*pi", "x pi"
std::optional<double> factor(std::string_view s) {
  const std::string t = trim(s);
  const auto at = t.find("pi");
  if (at == std::string::npos) return plain_number(t);
  if (at + 2 != t.size()) return std::nullopt;
  std::string head = trim(std::string_view(t).substr(0, at));
  if (!head.empty() && head.back() == '*') head = trim(std::string_view(head).substr(0, head.size() - 1));
  if (head.empty()) return std::numbers::pi;
  if (head == "-") return -std::numbers::pi;
  auto v = plain_number(head);
  if (!v) return std::nullopt;
  return *v * std::numbers::pi;
}

}  // namespace

bool is_known_key(const std::string& key) {
  if (key.rfind("sweep.", 0) == 0 && key != "sweep.workers" && key != "sweep.experiment") {
    const std::string inner = key.substr(6);
    return known_keys().count(inner) != 0 && inner.rfind("sweep.", 0) != 0;
  }
  return known_keys().count(key) != 0;
}

double parse_number(std::string_view text, const std::string& key) {
  const std::string t = trim(text);
  if (t.empty()) bad(key, "empty value");
  const auto slash = t.find('/');
  std::optional<double> v;
  if (slash == std::string::npos) {
    v = factor(t);
  } else {
    auto num = factor(std::string_view(t).substr(0, slash));
    auto den = plain_number(trim(std::string_view(t).substr(slash + 1)));
    if (num && den && *den != 0.0) v = *num / *den;
  }
  if (!v || !std::isfinite(*v)) bad(key, "not a number: '" + t + "'");
  return *v;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is{std::string(text)};
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Scenario Scenario::parse(std::string_view text, const std::string& source) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') throw ValidationError(where + ": malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    if (section.empty()) throw ValidationError(where + ": key outside of a [section]");
    const std::string key = section + "." + trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!is_known_key(key)) throw ValidationError(where + ": unknown key '" + key + "'");
    s.entries_[key] = value;
  }
  return s;
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.filename().string());
}

void Scenario::set(const std::string& key, const std::string& value) {
  if (!is_known_key(key)) throw ValidationError("unknown key '" + key + "'");
  entries_[key] = trim(value);
}

void Scenario::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("--set expects section.key=value, got '" + assignment + "'");
  set(trim(std::string_view(assignment).substr(0, eq)), assignment.substr(eq + 1));
}

std::optional<std::string> Scenario::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Scenario::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double Scenario::get_double(const std::string& key, double fallback) const {
  auto v = raw(key);
  return v ? parse_number(*v, key) : fallback;
}

int Scenario::get_int(const std::string& key, int fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  int out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad(key, "not an integer: '" + *v + "'");
  return out;
}

std::uint64_t Scenario::get_seed(const std::string& key, std::uint64_t fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) bad(key, "not an unsigned 64-bit integer: '" + *v + "'");
  return out;
}

bool Scenario::get_bool(const std::string& key, bool fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad(key, "expected true/false, got '" + *v + "'");
}

Rational Scenario::get_rational(const std::string& key, Rational fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  auto r = Rational::parse(*v);
  if (!r) bad(key, "expected a decimal or fraction such as 7/3, got '" + *v + "'");
  return *r;
}

std::vector<double> Scenario::get_list(const std::string& key, const std::vector<double>& fallback) const {
  auto v = raw(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) out.push_back(parse_number(item, key));
  if (out.empty()) bad(key, "empty list");
  return out;
}

std::string Scenario::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::string Scenario::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace benjctl::app
