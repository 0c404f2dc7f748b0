#pragma once

#include <stdexcept>
#include <string>

namespace coneproj {

enum class ErrorKind {
  invalid_input,
  solver_failure,
  unsupported,
  oracle_disagreement,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::invalid_input:
    return "invalid-input";
  case ErrorKind::solver_failure:
    return "solver-failure";
  case ErrorKind::unsupported:
    return "unsupported";
  case ErrorKind::oracle_disagreement:
    return "oracle-disagreement";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

} // namespace coneproj
