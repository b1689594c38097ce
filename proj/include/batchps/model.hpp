#pragma once

// Model core for the M^[X]/M/1 processor-sharing queue with geometric batches:
// parameter validation, the constants that locate every singularity, and
// real-axis evaluation of the transforms and generating functions.
//
// Units: time is measured in mean job service times; rho is the batch arrival
// rate in the same unit.

#include <cstdint>

namespace batchps {

class ModelParams {
 public:
  double rho() const noexcept { return rho_; }
  double q() const noexcept { return q_; }
  /// Job load rho / (1 - q); strictly below one.
  double rho_star() const noexcept { return rho_star_; }
  /// Mean batch size 1 / (1 - q).
  double mean_batch() const noexcept { return 1.0 / (1.0 - q_); }

  friend ModelParams validate_params(double rho, double q);

 private:
  ModelParams(double rho, double q) : rho_(rho), q_(q), rho_star_(rho / (1.0 - q)) {}

  double rho_;
  double q_;
  double rho_star_;
};

/// Accepts iff 0 < q < 1, rho > 0 and rho < 1 - q. Throws ParameterError with
/// kind OutOfRange or Unstable naming the violated bound.
ModelParams validate_params(double rho, double q);

/// Same as validate_params(rho_star * (1 - q), q), after checking rho_star.
ModelParams params_from_load(double rho_star, double q);

struct SpectralConstants {
  double sigma_plus;   // decay abscissa of every continuous tail, < 0
  double sigma_minus;  // other branch point, < sigma_plus
  double zeta_minus;   // radius of convergence of the job-count PGFs, > 1
  double zeta_plus;
  double t_q;          // residual busy-period transform at sigma_plus
  double s_q;          // its square-root singular coefficient
  double l_q;          // square-root coefficient of the inter-departure transform
  double u_star;       // inter-departure transform at sigma_plus
  double r_q;
  double kappa_q;
  double k_q;          // prefactor of the P(J = j) tail law
};

SpectralConstants spectral_constants(const ModelParams& p);

/// (1 - q) z / (1 - q z), z in [0, 1/q).
double batch_pgf(const ModelParams& p, double z);

/// PGF of the number of jobs found by a tagged batch, z in [0, 1/(rho+q)).
double n0_pgf(const ModelParams& p, double z);

/// PGF of N0 + B, z in [0, 1/(rho+q)).
double phi_pgf(const ModelParams& p, double z);

/// Busy-period Laplace transform, s >= sigma_plus.
double busy_lt(const ModelParams& p, double s);

/// Mean busy period, -T*'(0).
double busy_mean(const ModelParams& p);

/// PGF of the number of jobs served in a busy period, z in [0, zeta_minus).
double jobs_pgf(const ModelParams& p, double z);

/// Residual busy-period transform after a tagged batch arrival, s >= sigma_plus.
double residual_busy_lt(const ModelParams& p, double s);

/// PGF of the jobs served in the residual busy period, z in [0, zeta_minus).
double residual_jobs_pgf(const ModelParams& p, double z);

/// Smallest root of the busy-period functional equation at (r, s), the
/// double transform E(r^M e^{-sT}). r in [0, 1], s >= 0.
double busy_double_transform(const ModelParams& p, double r, double s);

/// E_{n,b}(r^M~ e^{-s T~}) for n jobs found and a batch of b >= 1 jobs.
double joint_conditional_transform(const ModelParams& p, std::uint64_t n, std::uint64_t b,
                                   double r, double s);

/// Transform of one inter-departure time under the i.i.d. hypothesis,
/// s >= sigma_plus.
double interdeparture_lt(const ModelParams& p, double s);

/// Rational map t -> U from the residual busy-period transform value t to the
/// inter-departure transform value.
double interdeparture_from_residual(const ModelParams& p, double t);

/// Density of the busy period at t > 0.
double busy_density(const ModelParams& p, double t);

}  // namespace batchps
