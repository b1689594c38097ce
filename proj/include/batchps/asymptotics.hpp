#pragma once

// Closed-form tail laws. Continuous laws read C x^(-power) e^(rate x) with
// rate < 0; discrete laws read C m^(-power) ratio^m with ratio = 1/zeta in (0, 1).

#include <cstddef>
#include <functional>

#include "batchps/model.hpp"

namespace batchps {

struct TailAsymptote {
  enum class Kind { Continuous, Discrete };

  Kind kind;
  double prefactor;
  double power;
  double rate;  // exponential abscissa (continuous) or geometric ratio (discrete)

  /// Evaluated in log space; x > 0.
  double operator()(double x) const;
  double log_value(double x) const;
};

/// P(T > x) for the busy period.
TailAsymptote busy_tail(const ModelParams& p);
/// P(M = m).
TailAsymptote m_tail(const ModelParams& p);
/// P(T~ > x).
TailAsymptote residual_busy_tail(const ModelParams& p);
/// P(M~ = m).
TailAsymptote mtilde_tail(const ModelParams& p);
/// P(J = j).
TailAsymptote j_tail(const ModelParams& p);
/// P(Omega~ > x) for a given H_q. Throws NonPositivePrefactor if the prefactor
/// comes out <= 0.
TailAsymptote omega_tail(const ModelParams& p, double h_q);

/// Asymptotic ratio P(T~ > x) / P(T > x), (1 - rho - q) / |sigma_plus|.
double residual_vs_full_ratio(const ModelParams& p);

/// Smallest index past `mode` where the geometric factor of a discrete law has
/// dropped by `decay`.
std::size_t far_tail_index(const TailAsymptote& law, std::size_t mode, double decay = 1e6);

/// Ratio of an exact sequence to its tail law at doubling indices.
struct RatioProbe {
  std::size_t start_index = 0;
  double start_ratio = 0;
  std::size_t index = 0;  // where the doubling stopped
  double ratio = 0;
  double previous_ratio = 0;
  bool converged = false;
};

/// exact(j) / law(j) at j = start, 2 start, 4 start, ... until two successive
/// ratios differ by at most `settle`, or the index would pass `max_index`.
RatioProbe probe_ratio_convergence(const std::function<double(std::size_t)>& exact,
                                   const TailAsymptote& law, std::size_t start, double settle,
                                   std::size_t max_index);

}  // namespace batchps
