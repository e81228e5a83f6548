#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "birthtail/rates.hpp"

namespace birthtail {

struct Agent {
  RateFunction f;
  int64_t x0 = 1;
};

// A agents stored as groups of identical agents, so symmetric systems with
// A = 10^6 stay cheap. Agents are numbered 0..A-1 in group order.
class UrnSystem {
public:
  struct Group {
    RateFunction f;
    int64_t x0 = 1;
    int64_t count = 1;
  };

  UrnSystem() = default;
  static UrnSystem symmetric(const RateFunction& f, int64_t x0, int64_t agents);

  UrnSystem& add(const RateFunction& f, int64_t x0, int64_t count = 1);

  int64_t size() const { return size_; }
  const std::vector<Group>& groups() const { return groups_; }
  Agent agent(int64_t i) const;
  size_t group_of(int64_t i) const;
  bool is_symmetric() const { return groups_.size() == 1; }
  int64_t explosive_count() const;

  // throws unless A >= 2 and at least one agent is explosive
  void validate() const;
  std::string describe() const;

private:
  std::vector<Group> groups_;
  int64_t size_ = 0;
};

// one `agent=<rate-spec>@<x0>` line per agent; '#' comments and blank lines ignored
UrnSystem parse_system(const std::string& text);

}  // namespace birthtail
