#ifndef PDC_ERRORS_HPP
#define PDC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: wrong shape, asymmetry, missing diagonal, invalid cover or tree.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied argument violates an operation's precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Data that should be positive semidefinite is not (a block, a Toeplitz section).
class DefinitenessError : public Error {
 public:
  using Error::Error;
};

/// A function is not a member of the requested reproducing kernel Hilbert space.
class MembershipError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown: non-convergence, loss of definiteness during iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdc

#endif  // PDC_ERRORS_HPP
