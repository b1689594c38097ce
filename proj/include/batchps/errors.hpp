#pragma once

#include <stdexcept>
#include <string>

namespace batchps {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the real interval on which a transform is evaluated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raw (rho, q) input rejected by validate_params.
class ParameterError : public Error {
 public:
  enum class Kind { OutOfRange, Unstable };

  ParameterError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A truncated series or sum left more unaccounted mass than allowed.
class TruncationTooSmall : public Error {
 public:
  TruncationTooSmall(const std::string& what, double remainder, std::string dominant = {})
      : Error(what), remainder_(remainder), dominant_(std::move(dominant)) {}

  double remainder() const noexcept { return remainder_; }
  /// Which truncated sum contributes most of the remainder (may be empty).
  const std::string& dominant() const noexcept { return dominant_; }

 private:
  double remainder_;
  std::string dominant_;
};

class PrecisionLoss : public Error {
 public:
  using Error::Error;
};

class InsufficientTailData : public Error {
 public:
  using Error::Error;
};

/// Raised when a tail prefactor that must be positive is not: a sign fault.
class NonPositivePrefactor : public Error {
 public:
  using Error::Error;
};

class SimulationGuard : public Error {
 public:
  using Error::Error;
};

}  // namespace batchps
