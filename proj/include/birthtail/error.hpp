#pragma once

#include <stdexcept>
#include <string>

namespace birthtail {

enum class ErrorKind {
  parse,
  domain,
  divergence,
  undecidable,
  distinctness,
  precision,
  degenerate,
  unsupported,
  assumption,
  regular_variation,
  empty_sample,
  insufficient_data,
  range,
  registry,
  io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace birthtail
