#pragma once

#include <stdexcept>
#include <string>

namespace qkelly {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Bayes update conditioned on an outcome that cannot occur.
class ZeroProbabilityOutcome : public Error {
public:
  using Error::Error;
};

/// A bet would wipe out the bankroll (full stake on an uncertain outcome).
class BankruptWealth : public Error {
public:
  using Error::Error;
};

class DegenerateDelta : public Error {
public:
  using Error::Error;
};

/// The closed-form information angle has a vanishing denominator.
class UndefinedFormula : public Error {
public:
  using Error::Error;
};

/// Prior is 0 or 1, so no measurement carries information.
class DegeneratePrior : public Error {
public:
  using Error::Error;
};

/// Value function lost monotonicity in the step index; the prior grid needs refining.
class GridTooCoarse : public Error {
public:
  using Error::Error;
};

class OutOfRangeWealth : public Error {
public:
  using Error::Error;
};

class InstanceTooLarge : public Error {
public:
  using Error::Error;
};

class UnsolvablePolicy : public Error {
public:
  using Error::Error;
};

class IoFailure : public Error {
public:
  using Error::Error;
};

}  // namespace qkelly
