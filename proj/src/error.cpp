#include "birthtail/error.hpp"

namespace birthtail {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::domain: return "domain";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::undecidable: return "undecidable";
    case ErrorKind::distinctness: return "distinctness";
    case ErrorKind::precision: return "precision-loss";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::assumption: return "assumption";
    case ErrorKind::regular_variation: return "regular-variation";
    case ErrorKind::empty_sample: return "empty-sample";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::range: return "range";
    case ErrorKind::registry: return "registry";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace birthtail
