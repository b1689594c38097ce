#pragma once

#include <cmath>
#include <span>

namespace batchps {

/// Neumaier's variant of Kahan summation. Terms are added in call order; the
/// compensation also survives a term larger in magnitude than the running sum.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double initial) : sum_(initial) {}

  CompensatedSum& operator+=(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  CompensatedSum& operator-=(double x) noexcept { return *this += -x; }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Sums positive and negative terms in separate compensated accumulators and
/// combines them once. The ratio magnitude()/|value()| measures cancellation.
class SignSplitSum {
 public:
  SignSplitSum& operator+=(double x) noexcept {
    if (x >= 0.0) {
      positive_ += x;
    } else {
      negative_ += x;
    }
    return *this;
  }

  double value() const noexcept { return positive_.value() + negative_.value(); }
  double positive() const noexcept { return positive_.value(); }
  double negative() const noexcept { return negative_.value(); }
  double magnitude() const noexcept { return positive_.value() - negative_.value(); }

 private:
  CompensatedSum positive_;
  CompensatedSum negative_;
};

/// Compensated sum of a sequence, index order.
inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc += x;
  return acc.value();
}

}  // namespace batchps
