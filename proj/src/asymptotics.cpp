#include "batchps/asymptotics.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "batchps/errors.hpp"

namespace batchps {
namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

}  // namespace

double TailAsymptote::log_value(double x) const {
  const double geometric = kind == Kind::Continuous ? rate * x : x * std::log(rate);
  return std::log(prefactor) - power * std::log(x) + geometric;
}

double TailAsymptote::operator()(double x) const { return std::exp(log_value(x)); }

TailAsymptote busy_tail(const ModelParams& p) {
  const auto k = spectral_constants(p);
  const double c = std::pow(1.0 - p.q(), 0.25) /
                   (2.0 * kSqrtPi * std::pow(p.rho(), 0.75) * std::fabs(k.sigma_plus));
  return {TailAsymptote::Kind::Continuous, c, 1.5, k.sigma_plus};
}

TailAsymptote m_tail(const ModelParams& p) {
  const auto k = spectral_constants(p);
  const double c = p.q() * std::sqrt((k.zeta_plus - k.zeta_minus) * k.zeta_minus) / (4.0 * p.rho() * kSqrtPi);
  return {TailAsymptote::Kind::Discrete, c, 1.5, 1.0 / k.zeta_minus};
}

TailAsymptote residual_busy_tail(const ModelParams& p) {
  const auto k = spectral_constants(p);
  const double c = (1.0 - p.q() - p.rho()) * std::sqrt(k.sigma_plus - k.sigma_minus) /
                   (4.0 * kSqrtPi * p.rho() * k.sigma_plus * k.sigma_plus);
  return {TailAsymptote::Kind::Continuous, c, 1.5, k.sigma_plus};
}

TailAsymptote mtilde_tail(const ModelParams& p) {
  const auto k = spectral_constants(p);
  const double lam = p.rho() + p.q();
  const double c = (1.0 - p.q() - p.rho()) * p.q() * std::sqrt((k.zeta_plus - k.zeta_minus) * k.zeta_minus) /
                   (4.0 * kSqrtPi * p.rho() * lam * (k.zeta_minus - 1.0));
  return {TailAsymptote::Kind::Discrete, c, 1.5, 1.0 / k.zeta_minus};
}

TailAsymptote j_tail(const ModelParams& p) {
  const auto k = spectral_constants(p);
  return {TailAsymptote::Kind::Discrete, k.k_q, 2.5, 1.0 / k.zeta_minus};
}

TailAsymptote omega_tail(const ModelParams& p, double h_q) {
  if (!(h_q > 0.0) || !std::isfinite(h_q)) {
    throw DomainError(fmt::format("omega_tail: H_q = {} must be positive and finite", h_q));
  }
  const auto k = spectral_constants(p);
  // L_q and sigma_plus are both negative.
  const double c = h_q * k.l_q / (2.0 * k.sigma_plus * kSqrtPi);
  if (!(c > 0.0)) {
    throw NonPositivePrefactor(fmt::format("omega_tail: prefactor {} is not positive", c));
  }
  return {TailAsymptote::Kind::Continuous, c, 1.5, k.sigma_plus};
}

double residual_vs_full_ratio(const ModelParams& p) {
  const auto k = spectral_constants(p);
  return (1.0 - p.rho() - p.q()) / std::fabs(k.sigma_plus);
}

std::size_t far_tail_index(const TailAsymptote& law, std::size_t mode, double decay) {
  if (law.kind != TailAsymptote::Kind::Discrete) {
    throw DomainError("far_tail_index: continuous law");
  }
  const double steps = std::log(decay) / -std::log(law.rate);
  return mode + static_cast<std::size_t>(std::ceil(steps));
}

RatioProbe probe_ratio_convergence(const std::function<double(std::size_t)>& exact,
                                   const TailAsymptote& law, std::size_t start, double settle,
                                   std::size_t max_index) {
  RatioProbe r;
  r.start_index = start;
  r.index = start;
  r.start_ratio = exact(start) / law(static_cast<double>(start));
  r.ratio = r.start_ratio;
  while (2 * r.index <= max_index) {
    const std::size_t next = 2 * r.index;
    const double ratio = exact(next) / law(static_cast<double>(next));
    r.previous_ratio = r.ratio;
    r.ratio = ratio;
    r.index = next;
    if (std::fabs(r.ratio - r.previous_ratio) <= settle) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace batchps
