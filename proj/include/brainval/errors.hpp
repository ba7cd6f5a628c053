#pragma once

#include <stdexcept>
#include <string>

namespace brainval {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimensions violate d_l < d_x, d_l <= d_r, or disagree between inputs.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Requested misalignment cannot be realized by a unit task vector.
class MisalignmentError : public Error {
public:
    using Error::Error;
};

/// A design or normal-equation matrix is singular at the 1e12 condition guard.
class SingularDesignError : public Error {
public:
    using Error::Error;
};

/// A matrix that must have full rank does not, or a requested rank is too large.
class RankError : public Error {
public:
    using Error::Error;
};

/// Sample counts fall outside the range where a closed form is defined.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// A schedule or value formula has a non-positive denominator (gamma_I <= 0).
class DegenerateError : public Error {
public:
    using Error::Error;
};

class DivideByZeroError : public Error {
public:
    using Error::Error;
};

/// Risk at or below the noise floor, so the TOS law cannot be inverted.
class InversionError : public Error {
public:
    using Error::Error;
};

/// No feasible (n_B, n_T) allocation exists for the budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace brainval
