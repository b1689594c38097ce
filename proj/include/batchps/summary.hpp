#pragma once

// Empirical statistics over simulator output.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "batchps/series.hpp"
#include "batchps/simulator.hpp"

namespace batchps {

/// Welford running mean and variance.
class MeanAccumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const noexcept;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

/// Counts of a nonnegative integer statistic.
class CountHistogram {
 public:
  void add(std::uint64_t k) {
    if (k >= counts_.size()) counts_.resize(k + 1, 0);
    ++counts_[k];
    ++total_;
  }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t count(std::uint64_t k) const noexcept { return k < counts_.size() ? counts_[k] : 0; }
  std::uint64_t max_value() const noexcept { return counts_.empty() ? 0 : counts_.size() - 1; }
  double pmf(std::uint64_t k) const noexcept;
  /// Binomial standard error of pmf(k).
  double pmf_std_error(std::uint64_t k) const noexcept;
  /// Most frequent value (smallest on ties).
  std::uint64_t mode() const noexcept;
  /// Smallest k with empirical P(X <= k) >= level.
  std::uint64_t quantile(double level) const noexcept;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// Empirical survival function of a continuous sample.
class EmpiricalCcdf {
 public:
  explicit EmpiricalCcdf(std::vector<double> values);
  std::size_t size() const noexcept { return sorted_.size(); }
  /// Fraction of the sample strictly above x.
  double operator()(double x) const noexcept;
  /// Binomial standard error of operator()(x).
  double std_error(double x) const noexcept;
  double quantile(double level) const noexcept;
  const std::vector<double>& sorted() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Histogram as a pmf over {0..max_value()}, no tail mass.
DiscretePmf empirical_pmf(const CountHistogram& h, std::string label);

struct TailFit {
  double slope = 0;
  double slope_std_error = 0;
  double x_lo = 0;  // fit window in the sample's units
  double x_hi = 0;
  std::size_t points = 0;
};

/// Least squares of log ccdf against x over the sample points whose empirical
/// ccdf lies in [ccdf_hi, ccdf_lo]. Throws InsufficientTailData below 100
/// points or when x has no spread.
TailFit fit_tail_slope(const EmpiricalCcdf& ccdf, double ccdf_lo = 1e-2, double ccdf_hi = 1e-4);

struct EmpiricalSummary {
  std::uint64_t records = 0;
  std::uint64_t aborted = 0;
  std::uint64_t invariant_violations = 0;
  CountHistogram n0, b, m_tilde, i_b, j_sampled;
  MeanAccumulator t_tilde, omega, omega_hat, m_tilde_mean, first_departure;
  std::vector<double> omega_values;      // kept only when requested
  std::vector<double> omega_hat_values;
};

/// Incremental summary over record blocks; fits a RecordSink.
class SummaryAccumulator {
 public:
  explicit SummaryAccumulator(bool keep_sojourn_samples) : keep_(keep_sojourn_samples) {}
  void add(std::span<const TaggedBatchRecord> block);
  const EmpiricalSummary& summary() const noexcept { return s_; }
  EmpiricalSummary take() { return std::move(s_); }

 private:
  bool keep_;
  EmpiricalSummary s_;
};

}  // namespace batchps
