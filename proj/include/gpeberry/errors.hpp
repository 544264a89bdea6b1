#pragma once

#include <stdexcept>
#include <string>

namespace gpeberry {

// Base of every error thrown by the library. The CLI maps subclasses to
// exit codes: ConfigError -> 2, numerical aborts -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// sigma_tilde*mu - rho^2 <= 0 or sigma_0*mu - rho^2 <= 0: no localized
// stationary states exist for these parameters.
class LocalizationViolated : public Error {
 public:
  using Error::Error;
};

// A moment integration produced a non-finite value.
class StepRejected : public Error {
 public:
  using Error::Error;
};

// The germ coordinate C vanished (caustic) or Im Q left the upper half-plane.
class GermDegenerate : public Error {
 public:
  using Error::Error;
};

// The spatial grid cannot resolve the state (truncation estimate or
// boundary amplitude too large).
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

// Overlap of the propagated state with the reference eigenstate fell to or
// below the fidelity threshold.
class AdiabaticityLost : public Error {
 public:
  using Error::Error;
};

// PDE propagation drifted in norm or leaked to the grid boundary.
class StabilityLost : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpeberry
