#pragma once

// Exact truncated PMFs by power-series coefficient extraction.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "batchps/model.hpp"

namespace batchps {

/// Probability masses on {offset, offset+1, ...}; tail_mass is whatever the
/// truncation left unaccounted (1 - sum of mass).
struct DiscretePmf {
  std::string label;
  std::size_t offset = 0;
  std::vector<double> mass;
  double tail_mass = 0.0;

  /// P(X = k); zero outside the stored support.
  double at(std::size_t k) const noexcept {
    return (k < offset || k - offset >= mass.size()) ? 0.0 : mass[k - offset];
  }
  std::size_t last_index() const noexcept { return offset + mass.size() - 1; }
  double mean() const;
};

struct TruncationPolicy {
  /// Largest tolerated tail_mass; TruncationTooSmall above it.
  double max_tail = 1e-10;
};

/// g_k(m) = [z^m] (z G(z))^k for 1 <= k <= k_max, 0 <= m <= m_max. Row k is the
/// law of M~ given n + b = k.
class CoefficientTable {
 public:
  CoefficientTable(std::size_t k_max, std::size_t m_max)
      : k_max_(k_max), m_max_(m_max), values_(k_max * (m_max + 1), 0.0), remainder_(k_max, 0.0) {}

  std::size_t k_max() const noexcept { return k_max_; }
  std::size_t m_max() const noexcept { return m_max_; }
  double operator()(std::size_t k, std::size_t m) const { return values_[(k - 1) * (m_max_ + 1) + m]; }
  double& operator()(std::size_t k, std::size_t m) { return values_[(k - 1) * (m_max_ + 1) + m]; }
  /// Mass of row k beyond m_max.
  double remainder(std::size_t k) const { return remainder_[k - 1]; }
  double& remainder(std::size_t k) { return remainder_[k - 1]; }
  const double* row(std::size_t k) const { return values_.data() + (k - 1) * (m_max_ + 1); }

 private:
  std::size_t k_max_;
  std::size_t m_max_;
  std::vector<double> values_;
  std::vector<double> remainder_;
};

/// Coefficients m_0..m_n of M*(z) (m_0 = 0), by the quadratic recurrence.
std::vector<double> busy_jobs_coefficients(const ModelParams& p, std::size_t n);

/// Coefficients X_0..X_n of z G(z), G = 1/(1 + rho - rho M*).
std::vector<double> kernel_coefficients(const ModelParams& p, std::size_t n);

DiscretePmf m_pmf(const ModelParams& p, std::size_t m_max, TruncationPolicy policy = {});

/// Law of N0, the jobs found by a tagged batch.
DiscretePmf n0_pmf(const ModelParams& p, std::size_t n_max);

CoefficientTable conditional_mtilde_table(const ModelParams& p, std::size_t k_max, std::size_t m_max,
                                          TruncationPolicy policy = {});

/// Sequence b_k of the exact residual-job law together with its checks.
struct BSeries {
  std::vector<double> b;        // b_0 .. b_L
  double remainder_bound = 0;   // |sum_{k > L} b_k| <= remainder_bound
  double identity_residual = 0; // (1 + rho) sum b_k - (1 - rho - q)
};

/// b_k up to an adaptively chosen L >= min_terms.
BSeries b_series(const ModelParams& p, std::size_t min_terms);

/// Square-root Taylor coefficients a_0..a_n of sqrt(1 - x).
std::vector<double> sqrt_coefficients(std::size_t n);

DiscretePmf mtilde_pmf_tail_sum(const ModelParams& p, std::size_t m_max, TruncationPolicy policy = {});
DiscretePmf mtilde_pmf_composition(const ModelParams& p, std::size_t m_max, TruncationPolicy policy = {});

/// P(J = j | b, m) on {b..m}.
DiscretePmf j_conditional_pmf(std::uint64_t b, std::uint64_t m);

struct JPmfOptions {
  /// Batch sizes are dropped once P(B = b) falls below this.
  double batch_cutoff = 1e-16;
  /// Relative mass of M~ above the series order that may be ignored.
  double m_cutoff = 1e-12;
  TruncationPolicy policy{1e-8};
};

/// Unconditional P(J = j), j = 1..j_max.
DiscretePmf j_pmf(const ModelParams& p, std::size_t j_max, JPmfOptions options = {});

/// Same law assembled from an explicit table over (n, b); used as a cross-check.
DiscretePmf j_pmf_from_table(const ModelParams& p, const CoefficientTable& table, std::size_t j_max);

/// Smallest m_max whose geometric envelope bounds the M~ mass beyond it by tol.
std::size_t adaptive_m_max(const ModelParams& p, double tol = 1e-10);
/// Same for J.
std::size_t adaptive_j_max(const ModelParams& p, double tol = 1e-10);

/// K_q from the double sum over (b, n) instead of the closed form.
double k_q_deconditioned(const ModelParams& p);

struct HqEstimate {
  double value = 0;            // exact part plus the tail-law estimate of the rest
  double exact_part = 0;
  double tail_part = 0;        // tail-law sum past the last index
  double remainder_bound = 0;  // half-width of the uncertainty on tail_part
  std::size_t last_index = 0;
  double ratio_at_last = 0;    // pmf / tail law at last_index
};

struct HqOptions {
  /// TruncationTooSmall if remainder_bound / value exceeds this.
  double max_relative_remainder = 0.05;
  /// Add the tail-law continuation past the last index. Off for empirical pmfs
  /// whose support is not a truncation.
  bool tail_continuation = true;
};

/// H_q = sum_j j P(J = j) u*^(j-1).
HqEstimate h_q(const ModelParams& p, const DiscretePmf& j_law, HqOptions options = {});

/// H_q from the exact J law, doubling j_max until the tail uncertainty is at
/// most max_relative_remainder of the value.
HqEstimate h_q_analytic(const ModelParams& p, double max_relative_remainder = 0.02);

}  // namespace batchps
