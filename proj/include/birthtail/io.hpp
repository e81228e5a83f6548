#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "birthtail/sim.hpp"

namespace birthtail {

std::string read_file(const std::string& path);
// writes to a temporary sibling and renames it over `path`
void atomic_write(const std::string& path, const std::string& content);

std::string birth_csv(const std::vector<BirthOutcome>& v);
std::string urn_csv(const std::vector<UrnOutcome>& v, int64_t agents);

// quote a CSV field if needed
std::string csv_field(const std::string& s);

}  // namespace birthtail
