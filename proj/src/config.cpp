#include "birthtail/config.hpp"

#include <cmath>
#include <sstream>

#include "birthtail/error.hpp"

namespace birthtail {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      fail(ErrorKind::parse, "config line " + std::to_string(lineno) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

ParamSet::ParamSet(std::string experiment, std::map<std::string, std::string> defaults)
    : experiment_(std::move(experiment)), values_(std::move(defaults)) {}

void ParamSet::set(const std::string& key, const std::string& v, const std::string& origin) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    std::string known;
    for (const auto& [k, _] : values_) known += (known.empty() ? "" : ", ") + k;
    fail(ErrorKind::parse, origin + ": unknown key '" + key + "' for experiment " + experiment_ + " (known: " + known + ")");
  }
  it->second = v;
}

void ParamSet::apply_file(const std::map<std::string, std::string>& entries) {
  const std::string prefix = experiment_ + ".";
  for (const auto& [k, v] : entries)
    if (k.rfind(prefix, 0) == 0) set(k.substr(prefix.size()), v, "config");
}

void ParamSet::apply_overrides(const std::map<std::string, std::string>& entries) {
  const std::string prefix = experiment_ + ".";
  for (const auto& [k, v] : entries) set(k.rfind(prefix, 0) == 0 ? k.substr(prefix.size()) : k, v, "override");
}

const std::string& ParamSet::str(const std::string& key) const {
  auto it = values_.find(key);
  require(it != values_.end(), ErrorKind::parse, "missing parameter '" + key + "'");
  return it->second;
}

namespace {

double to_real(const std::string& s, const std::string& key) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    used = 0;
  }
  require(used > 0 && used == s.size(), ErrorKind::parse, "parameter " + key + "='" + s + "' is not a number");
  return v;
}

int64_t to_int(const std::string& s, const std::string& key) {
  const double v = to_real(s, key);
  require(v == std::floor(v) && std::fabs(v) < 9.0e18, ErrorKind::parse,
          "parameter " + key + "='" + s + "' is not an integer");
  return static_cast<int64_t>(v);
}

}  // namespace

double ParamSet::real(const std::string& key) const { return to_real(str(key), key); }

int64_t ParamSet::integer(const std::string& key) const { return to_int(str(key), key); }

uint64_t ParamSet::seed(const std::string& key) const {
  const std::string& s = str(key);
  size_t used = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (...) {
    used = 0;
  }
  require(used > 0 && used == s.size() && s[0] != '-', ErrorKind::parse,
          "parameter " + key + "='" + s + "' is not a 64-bit seed");
  return v;
}

std::vector<double> ParamSet::reals(const std::string& key) const {
  std::vector<double> v;
  for (const auto& p : split(str(key), ';'))
    if (!p.empty()) v.push_back(to_real(p, key));
  return v;
}

std::vector<int64_t> ParamSet::integers(const std::string& key) const {
  std::vector<int64_t> v;
  for (const auto& p : split(str(key), ';'))
    if (!p.empty()) v.push_back(to_int(p, key));
  return v;
}

std::vector<std::string> ParamSet::strings(const std::string& key) const {
  std::vector<std::string> v;
  std::istringstream in(str(key));
  std::string w;
  while (in >> w) v.push_back(w);
  return v;
}

}  // namespace birthtail
