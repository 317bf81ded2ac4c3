#ifndef SSOTR_ERRORS_HPP
#define SSOTR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ssotr {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid data or configuration: bad CSV cells, dimension mismatches,
/// missing treatment arms, infeasible fold counts. CLI exit code 2.
class InputError : public Error {
  public:
    using Error::Error;
};

/// Numerical failure: rank-deficient designs, separation in the
/// propensity fit, singular information matrices. CLI exit code 3.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Too many replications of a simulation study failed. CLI exit code 4.
class StudyError : public Error {
  public:
    using Error::Error;
};

} // namespace ssotr

#endif
