#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace statphase {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point was evaluated outside the domain of a field.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A derivative order beyond the declared smoothness (or the engine cap) was requested.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid construction parameters (unknown family, singular matrix, bad radius, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A construction would exceed a configured resource cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// The phase has a vanishing Hessian determinant somewhere on the audit grid.
class DegeneratePhaseError : public Error {
 public:
  using Error::Error;
};

/// An operation requiring a passed hypothesis audit was given a failing phase.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

/// |grad Phi| fell below the critical-point floor where A = grad Phi / |grad Phi|^2 is needed.
class NearCriticalError : public Error {
 public:
  using Error::Error;
};

/// Internal construction invariant broken (e.g. a point not covered by any ball).
class CoverDefectError : public Error {
 public:
  using Error::Error;
};

/// Configuration file could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Quadrature did not converge before the resolution cap; carries the best value seen.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, std::complex<double> best, double delta)
      : Error(what), best_value(best), last_delta(delta) {}

  std::complex<double> best_value;
  double last_delta;
};

}  // namespace statphase
