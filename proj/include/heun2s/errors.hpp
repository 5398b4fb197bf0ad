#ifndef HEUN2S_ERRORS_HPP_
#define HEUN2S_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace heun2s {

// Argument outside the mathematical domain of an operation (Lambert W branch
// range, transformation evaluated outside its valid time interval, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Evaluation at, or integration across, a singular point.  `where` is the
// offending time or path parameter.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& msg, double where_)
      : std::runtime_error(msg), where(where_) {}
  double where;
};

// Parameter pole of a special function (e.g. 1F1 with b a non-positive
// integer).
class PoleError : public std::runtime_error {
 public:
  explicit PoleError(const std::string& msg) : std::runtime_error(msg) {}
};

// A leading recurrence coefficient vanished at n >= 1: the requested series
// branch does not exist (logarithmic case / invalid indicial exponent).
class ResonanceError : public std::runtime_error {
 public:
  explicit ResonanceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A parameter set violates the constraint system it is supposed to satisfy.
class ConstraintError : public std::runtime_error {
 public:
  explicit ConstraintError(const std::string& msg) : std::runtime_error(msg) {}
};

// A field configuration came out non-real for the chosen constants.
class RealnessError : public std::runtime_error {
 public:
  explicit RealnessError(const std::string& msg) : std::runtime_error(msg) {}
};

// A series was asked to do something its convergence class does not allow
// (direct summation of a zero-radius asymptotic expansion).
class ClassificationError : public std::runtime_error {
 public:
  explicit ClassificationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace heun2s

#endif  // HEUN2S_ERRORS_HPP_
