#include "batchps/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "batchps/errors.hpp"
#include "batchps/special.hpp"

namespace batchps {
namespace {

void require(bool ok, const char* what, double arg) {
  if (!ok) throw DomainError(fmt::format("{}: argument {} outside the analytic real interval", what, arg));
}

// Delta_q(s) = (s + 1 + rho - q)^2 - 4 rho (1 - q), written as
// (s + c)^2 + 4 rho s so the double root at s = 0 doesn't cancel when c is small.
double delta_s(const ModelParams& p, double s) {
  const double c = 1.0 - p.q() - p.rho();
  return std::fmax((s + c) * (s + c) + 4.0 * p.rho() * s, 0.0);
}

// delta_q(z) = (1 + rho - q z)^2 - 4 rho z (1 - q) = (c + q w)^2 + 4 rho w, w = 1 - z.
double delta_z(const ModelParams& p, double z) {
  const double w = 1.0 - z;
  const double a = 1.0 - p.q() - p.rho() + p.q() * w;
  return std::fmax(a * a + 4.0 * p.rho() * w, 0.0);
}

double sigma_plus(const ModelParams& p) {
  const double d = std::sqrt(1.0 - p.q()) - std::sqrt(p.rho());
  return -d * d;
}

double zeta_minus(const ModelParams& p) {
  const double d = (std::sqrt(p.rho() + p.q()) - std::sqrt(p.rho() * (1.0 - p.q()))) / p.q();
  return d * d;
}

}  // namespace

ModelParams validate_params(double rho, double q) {
  using Kind = ParameterError::Kind;
  if (!(q > 0.0 && q < 1.0)) {
    throw ParameterError(Kind::OutOfRange, fmt::format("q = {} violates 0 < q < 1", q));
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError(Kind::OutOfRange, fmt::format("rho = {} violates rho > 0", rho));
  }
  if (!(rho < 1.0 - q)) {
    throw ParameterError(Kind::Unstable,
                         fmt::format("rho = {} violates stability bound rho < 1 - q = {}", rho, 1.0 - q));
  }
  return ModelParams(rho, q);
}

ModelParams params_from_load(double rho_star, double q) {
  using Kind = ParameterError::Kind;
  if (!(q > 0.0 && q < 1.0)) {
    throw ParameterError(Kind::OutOfRange, fmt::format("q = {} violates 0 < q < 1", q));
  }
  if (!(rho_star > 0.0) || !std::isfinite(rho_star)) {
    throw ParameterError(Kind::OutOfRange, fmt::format("rho* = {} violates rho* > 0", rho_star));
  }
  if (!(rho_star < 1.0)) {
    throw ParameterError(Kind::Unstable, fmt::format("rho* = {} violates stability bound rho* < 1", rho_star));
  }
  return validate_params(rho_star * (1.0 - q), q);
}

SpectralConstants spectral_constants(const ModelParams& p) {
  const double rho = p.rho();
  const double q = p.q();
  const double c = 1.0 - rho - q;
  const double root_rho_q = std::sqrt(rho * (1.0 - q));

  SpectralConstants k{};
  k.sigma_plus = sigma_plus(p);
  const double s_sum = std::sqrt(1.0 - q) + std::sqrt(rho);
  k.sigma_minus = -s_sum * s_sum;
  k.zeta_minus = zeta_minus(p);
  const double zp = (std::sqrt(rho + q) + root_rho_q) / q;
  k.zeta_plus = zp * zp;

  const double spread = std::sqrt(k.sigma_plus - k.sigma_minus);
  k.t_q = 1.0 + std::sqrt((1.0 - q) / rho);
  k.s_q = c * spread / (2.0 * rho * k.sigma_plus);
  const double shift = q + root_rho_q;
  k.l_q = k.sigma_plus * spread / (2.0 * shift * shift);
  k.u_star = (1.0 + rho - root_rho_q) / shift;

  const double zm = k.zeta_minus;
  const double denom = 1.0 + rho + q * zm;
  k.r_q = 2.0 * zm / denom;
  k.kappa_q = q * std::sqrt((k.zeta_plus - zm) * zm) / (2.0 * std::sqrt(std::numbers::pi) * denom);
  const double r = k.r_q;
  const double one_minus_qr = 1.0 - q * r;
  const double one_minus_lr = 1.0 - (rho + q) * r;
  k.k_q = k.kappa_q * zm / (zm - 1.0) * c * r / (one_minus_qr * one_minus_qr) *
          (1.0 - q * (rho + q) * r * r) / (one_minus_lr * one_minus_lr);
  return k;
}

double batch_pgf(const ModelParams& p, double z) {
  require(z >= 0.0 && z * p.q() < 1.0, "batch_pgf", z);
  return (1.0 - p.q()) * z / (1.0 - p.q() * z);
}

double n0_pgf(const ModelParams& p, double z) {
  require(z >= 0.0 && z * (p.rho() + p.q()) < 1.0, "n0_pgf", z);
  // 1 - rho* as (1 - q - rho)/(1 - q): exact cancellation against the pole at z = 1.
  const double c = 1.0 - p.rho() - p.q();
  return c * (1.0 - p.q() * z) / ((1.0 - p.q()) * (1.0 - (p.rho() + p.q()) * z));
}

double phi_pgf(const ModelParams& p, double z) {
  require(z >= 0.0 && z * (p.rho() + p.q()) < 1.0, "phi_pgf", z);
  return (1.0 - p.rho() - p.q()) * z / (1.0 - (p.rho() + p.q()) * z);
}

double busy_lt(const ModelParams& p, double s) {
  require(s >= sigma_plus(p), "busy_lt", s);
  // Smaller root of rho T^2 - (1 + s + rho - q) T + (1 - q) = 0, rationalized.
  return 2.0 * (1.0 - p.q()) / (s + 1.0 + p.rho() - p.q() + std::sqrt(delta_s(p, s)));
}

double busy_mean(const ModelParams& p) { return 1.0 / (1.0 - p.q() - p.rho()); }

double jobs_pgf(const ModelParams& p, double z) {
  require(z >= 0.0 && z < zeta_minus(p), "jobs_pgf", z);
  return 2.0 * (1.0 - p.q()) * z / (1.0 + p.rho() - p.q() * z + std::sqrt(delta_z(p, z)));
}

double residual_busy_lt(const ModelParams& p, double s) {
  require(s >= sigma_plus(p), "residual_busy_lt", s);
  if (s == 0.0) return 1.0;
  // sqrt(Delta) - (s + c) = 4 rho s / (sqrt(Delta) + s + c) removes the 0/0 at s = 0.
  const double c = 1.0 - p.rho() - p.q();
  return 2.0 * c / (std::sqrt(delta_s(p, s)) + s + c);
}

double residual_jobs_pgf(const ModelParams& p, double z) {
  require(z >= 0.0 && z < zeta_minus(p), "residual_jobs_pgf", z);
  if (z == 1.0) return 1.0;
  const double c = 1.0 - p.rho() - p.q();
  const double a = 1.0 + p.rho() - (p.q() + 2.0 * p.rho()) * z;
  return 2.0 * c * z / (a + std::sqrt(delta_z(p, z)));
}

double busy_double_transform(const ModelParams& p, double r, double s) {
  if (!(r >= 0.0 && r <= 1.0 && s >= 0.0)) {
    throw DomainError(fmt::format("busy_double_transform: (r, s) = ({}, {}) outside [0,1] x [0,inf)", r, s));
  }
  // rho v^2 - (1 + s + rho - q r) v + (1 - q) r = 0, minus branch.
  const double b = 1.0 + s + p.rho() - p.q() * r;
  const double disc = std::fmax(b * b - 4.0 * p.rho() * (1.0 - p.q()) * r, 0.0);
  const double nu = 2.0 * (1.0 - p.q()) * r / (b + std::sqrt(disc));
  if (!(nu >= 0.0 && nu <= 1.0)) {
    throw DomainError(fmt::format("busy_double_transform: root {} left [0, 1]", nu));
  }
  return nu;
}

double joint_conditional_transform(const ModelParams& p, std::uint64_t n, std::uint64_t b, double r,
                                   double s) {
  if (b < 1) throw DomainError("joint_conditional_transform: batch size must be >= 1");
  const double nu = busy_double_transform(p, r, s);
  const double base = r / (1.0 + s + p.rho() - p.rho() * nu);
  return std::pow(base, static_cast<double>(n + b));
}

double interdeparture_from_residual(const ModelParams& p, double t) {
  const double rho = p.rho();
  const double q = p.q();
  const double c = 1.0 - rho - q;
  const double r_of_t = (rho * t + c) * ((q + rho) * t + c);
  return (1.0 - q - rho * (q + rho) * (1.0 - t)) * t / r_of_t;
}

double interdeparture_lt(const ModelParams& p, double s) {
  return interdeparture_from_residual(p, residual_busy_lt(p, s));
}

double busy_density(const ModelParams& p, double t) {
  require(t > 0.0, "busy_density", t);
  const double rho = p.rho();
  const double q = p.q();
  const double a = 2.0 * std::sqrt(rho * (1.0 - q));
  // e^{-(1+rho-q)t} I1(a t) = e^{sigma_plus t} * (e^{-a t} I1(a t)).
  return std::sqrt((1.0 - q) / rho) * std::exp(sigma_plus(p) * t) *
         special::bessel_i1_scaled(a * t) / t;
}

}  // namespace batchps
