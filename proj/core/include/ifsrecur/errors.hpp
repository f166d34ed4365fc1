#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ifsrecur {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidIfs,     ///< singular or non-contracting maps, dimension mismatch
  Index,          ///< symbol outside the alphabet
  Domain,         ///< argument outside the operation's domain
  Unsupported,    ///< valid input the operation deliberately does not handle
  Budget,         ///< enumeration or raster size above the configured cap
  Numeric,        ///< numerically singular system
  Config,         ///< malformed configuration or input file
  Consistency,    ///< a provable bound was violated: indicates a bug
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace ifsrecur
