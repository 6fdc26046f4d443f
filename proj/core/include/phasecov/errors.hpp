#pragma once

#include <stdexcept>
#include <string>

namespace phasecov {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain where the quantity is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexOutOfTruncation : public Error {
 public:
  using Error::Error;
};

/// The requested cutoff discards more probability than the tolerance allows.
class TruncationTooSevere : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class TraceLossExceeded : public Error {
 public:
  using Error::Error;
};

class HermiticityViolation : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue is more negative than roundoff can explain.
class NegativeEigenvalue : public Error {
 public:
  using Error::Error;
};

/// The state derivative has weight outside the numerically retained support.
class DegenerateSupport : public Error {
 public:
  using Error::Error;
};

/// Step-halving of a finite-difference estimate did not agree.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

/// The Fisher-information bound diverges at this parameter point.
class SingularBound : public Error {
 public:
  using Error::Error;
};

class SingularInformation : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityCondition : public Error {
 public:
  using Error::Error;
};

class SupportExceedsN0 : public Error {
 public:
  using Error::Error;
};

}  // namespace phasecov
