#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace chaingap {

using cplx = std::complex<double>;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealMatrix = Mat<double>;
using ComplexMatrix = Mat<cplx>;
using RealVector = Vec<double>;
using ComplexVector = Vec<cplx>;

// ------ error taxonomy ------

// bad or unsupported configuration (CLI exit 2)
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// any numerical failure (CLI exit 5)
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedRegime : NumericalError {
  using NumericalError::NumericalError;
};

struct IllConditionedMode : NumericalError {
  using NumericalError::NumericalError;
};

struct LocalizationFailure : NumericalError {
  using NumericalError::NumericalError;
};

struct NoSteadyState : NumericalError {
  using NumericalError::NumericalError;
};

struct FitFailure : NumericalError {
  using NumericalError::NumericalError;
};

struct PoleProximityError : NumericalError {
  PoleProximityError(const std::string& what, int mode) : NumericalError(what), mode_index(mode) {}
  int mode_index;
};

struct DivergenceError : NumericalError {
  DivergenceError(const std::string& what, long step) : NumericalError(what), step_index(step) {}
  long step_index;
};

struct InternalConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace chaingap
