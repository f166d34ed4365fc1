#include "ifsrecur/errors.hpp"

namespace ifsrecur {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidIfs: return "invalid_ifs";
    case ErrorKind::Index: return "index";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Config: return "config";
    case ErrorKind::Consistency: return "consistency";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ifsrecur
