#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace halluzig {

/// Broad failure class. Maps one-to-one onto CLI exit codes.
enum class ErrorKind {
  usage,      // bad flags or configuration (exit 2)
  data,       // malformed or unusable input data (exit 3)
  invariant,  // internal consistency check failed (exit 4)
};

/// Specific failure, so callers and tests can tell failures apart
/// without parsing messages.
enum class ErrorCode {
  missing_manifest,
  malformed_manifest,
  shape_mismatch,
  non_finite_entry,
  out_of_range_entry,
  causal_violation,
  row_sum_violation,
  degenerate_layer,
  insufficient_depth,
  inconsistent_vertices,
  invalid_filtration,
  invalid_argument,
  single_class,
  dimension_mismatch,
  transfer_incompatible,
  io_failure,
  parse_failure,
  all_samples_failed,
  invariant_violation,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, ErrorCode code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(code) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  ErrorCode code_;
};

class DataError : public Error {
 public:
  DataError(ErrorCode code, const std::string& what)
      : Error(ErrorKind::data, code, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what,
                      ErrorCode code = ErrorCode::invalid_argument)
      : Error(ErrorKind::usage, code, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ErrorKind::invariant, ErrorCode::invariant_violation, what) {}
};

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::invariant:
      return 4;
  }
  return 4;
}

}  // namespace halluzig
