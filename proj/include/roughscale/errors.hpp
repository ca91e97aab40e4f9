#pragma once

#include <stdexcept>
#include <string>

namespace roughscale {

enum class ErrorKind {
  parameter_domain,
  grid,
  size,
  factorization,
  length,
  degenerate_moment,
  insufficient_data,
  rank,
  range,
  zero_variance,
  shape,
  argument,
  io,
  format,
  schema,
};

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter_domain: return "parameter_domain";
    case ErrorKind::grid: return "grid";
    case ErrorKind::size: return "size";
    case ErrorKind::factorization: return "factorization";
    case ErrorKind::length: return "length";
    case ErrorKind::degenerate_moment: return "degenerate_moment";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::rank: return "rank";
    case ErrorKind::range: return "range";
    case ErrorKind::zero_variance: return "zero_variance";
    case ErrorKind::shape: return "shape";
    case ErrorKind::argument: return "argument";
    case ErrorKind::io: return "io";
    case ErrorKind::format: return "format";
    case ErrorKind::schema: return "schema";
  }
  return "unknown";
}

}  // namespace roughscale
