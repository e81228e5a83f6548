#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace birthtail {

// key=value lines with '#' comments
std::map<std::string, std::string> parse_key_values(const std::string& text);

// Experiment parameters: documented defaults, then the config file's
// `<experiment>.<key>` entries, then command-line overrides.
class ParamSet {
public:
  ParamSet() = default;
  ParamSet(std::string experiment, std::map<std::string, std::string> defaults);

  // file entries for other experiments are ignored; unknown keys for this one are errors
  void apply_file(const std::map<std::string, std::string>& entries);
  // keys with or without the `<experiment>.` prefix
  void apply_overrides(const std::map<std::string, std::string>& entries);

  const std::string& str(const std::string& key) const;
  double real(const std::string& key) const;
  int64_t integer(const std::string& key) const;
  uint64_t seed(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;   // ';'-separated
  std::vector<int64_t> integers(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;  // whitespace-separated

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& experiment() const { return experiment_; }

private:
  void set(const std::string& key, const std::string& v, const std::string& origin);
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

}  // namespace birthtail
