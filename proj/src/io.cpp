#include "birthtail/io.hpp"

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace birthtail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::io, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      fail(ErrorKind::io, "write failed for " + path);
    }
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorKind::io, "cannot rename onto " + path + ": " + ec.message());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string birth_csv(const std::vector<BirthOutcome>& v) {
  std::ostringstream os;
  os << "replicate,state,exploded,jumps,stop_reason\n";
  for (size_t r = 0; r < v.size(); ++r) {
    const auto& o = v[r];
    os << r << ',' << (o.exploded ? std::string("EXPLODED") : std::to_string(o.state)) << ','
       << (o.exploded ? "true" : "false") << ',' << o.jumps << ',' << to_string(o.stop_reason) << '\n';
  }
  return os.str();
}

std::string urn_csv(const std::vector<UrnOutcome>& v, int64_t agents) {
  std::ostringstream os;
  os << "replicate,winner,n_mon";
  for (int64_t i = 1; i <= agents; ++i) os << ",x_inf_" << i;
  os << ",bias_bound\n";
  for (size_t r = 0; r < v.size(); ++r) {
    const auto& o = v[r];
    os << r << ',' << o.winner + 1 << ',' << o.n_mon;
    for (int64_t x : o.x_inf) os << ',' << (x < 0 ? std::string("inf") : std::to_string(x));
    os << ',' << fmt12(o.bias_bound) << '\n';
  }
  return os.str();
}

}  // namespace birthtail
