#pragma once

#include <stdexcept>
#include <string>

namespace spinflow {

// Root of the library's error hierarchy. Every throw site uses one of the
// specific kinds below so callers (and the CLI) can map failures to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input: bad dimensions, mismatched algebras, invalid parameters.
struct InvalidArgumentError : Error {
  using Error::Error;
};

// An operator (or tangent direction) fails to commute with the group action
// within tolerance, or a trace that must be real carries too much imaginary part.
struct EquivarianceError : Error {
  using Error::Error;
};

// No admissible spectral level exists (constant-zero family, or an endpoint
// eigenvalue sits exactly at the candidate level).
struct LevelSelectionError : Error {
  using Error::Error;
};

// A sampled family cannot be certified and no refiner is available.
struct ResolutionError : Error {
  using Error::Error;
};

// An iterative scheme failed to stabilize (bisection depth cap, quadrature
// order doubling, phase continuation).
struct ConvergenceError : Error {
  using Error::Error;
};

// Singular-value spectrum of a finite section has no clean gap at the
// null-space tolerance.
struct IllConditionedKernelError : Error {
  using Error::Error;
};

// Results changed when the Fourier cutoff was doubled.
struct TruncationError : Error {
  using Error::Error;
};

// A normal-bundle rotation angle is congruent to 0 mod 2pi.
struct SingularAngleError : Error {
  using Error::Error;
};

// Scenario/configuration problems (harness): unreadable files, contradictory
// or incomplete parameters. Mapped to exit code 2 by the CLI.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace spinflow
