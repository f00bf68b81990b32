#pragma once

#include <stdexcept>

namespace delaystab {

/// Failures of the numerical machinery (as opposed to bad inputs); the CLI
/// maps these to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// |det Delta| dipped below the boundary tolerance while sampling a contour;
/// the caller perturbs the box and retries.
struct RootNearBoundaryError : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace delaystab
