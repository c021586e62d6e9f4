//==============================================================================
// errors.hpp
// Single exception type for the library, tagged by failure kind and carrying
// the offending scalar (residual, inner product, eigenvalue ...) when useful.
//==============================================================================
#pragma once

#include <stdexcept>
#include <string>

namespace hw {

enum class ErrorKind {
  MultiplierDomain,
  GridMismatch,
  InvalidArgument,
  Divergence,
  Positivity,
  StaleGroundState,
  Solvability,
  Degeneracy,
  Numerics,
  Inconsistency,
  Domain,
  UnsupportedOrder,
  SearchFailure,
  Instability,
  ConservationViolation,
  Basin,
  Differencing,
  Dependency,
  Io,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double value = 0.0)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind), value_(value) {}
  ErrorKind kind() const { return kind_; }
  double value() const { return value_; }

 private:
  ErrorKind kind_;
  double value_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::MultiplierDomain: return "multiplier-domain";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Positivity: return "positivity-violation";
    case ErrorKind::StaleGroundState: return "stale-ground-state";
    case ErrorKind::Solvability: return "solvability";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Numerics: return "numerics";
    case ErrorKind::Inconsistency: return "inconsistency";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::UnsupportedOrder: return "unsupported-order";
    case ErrorKind::SearchFailure: return "search-failure";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::ConservationViolation: return "conservation-violation";
    case ErrorKind::Basin: return "basin";
    case ErrorKind::Differencing: return "differencing";
    case ErrorKind::Dependency: return "dependency";
    case ErrorKind::Io: return "io";
  }
  return "error";
}

}  // namespace hw
