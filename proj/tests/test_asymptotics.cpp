#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "batchps/asymptotics.hpp"
#include "batchps/errors.hpp"
#include "batchps/series.hpp"
#include "random_params.hpp"

using namespace batchps;
using doctest::Approx;

namespace {

const ModelParams light = validate_params(0.21, 0.3);

}  // namespace

TEST_CASE("busy-period tail law") {
  const auto k = spectral_constants(light);
  const auto law = busy_tail(light);
  CHECK(law.kind == TailAsymptote::Kind::Continuous);
  CHECK(law.rate == k.sigma_plus);
  CHECK(law.rate == Approx(-std::pow(std::sqrt(0.7) - std::sqrt(0.21), 2)).epsilon(1e-14));
  CHECK(law.power == 1.5);
  CHECK(law.prefactor ==
        Approx(std::pow(0.7, 0.25) / (2.0 * std::sqrt(M_PI) * std::pow(0.21, 0.75) * 0.143188419493)).epsilon(1e-10));
  // P(T > x) by quadrature of the density; the ratio closes in like 1/x.
  boost::math::quadrature::exp_sinh<double> quad;
  double prev = INFINITY;
  for (double x : {60.0, 240.0, 960.0}) {
    const double tail = quad.integrate([&](double u) { return busy_density(light, x + u); });
    const double gap = std::fabs(tail / law(x) - 1.0);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("rates match the spectral constants exactly") {
  for (const auto& p : testing::random_params(50, 41)) {
    const auto k = spectral_constants(p);
    CHECK(busy_tail(p).rate == k.sigma_plus);
    CHECK(residual_busy_tail(p).rate == k.sigma_plus);
    CHECK(omega_tail(p, 2.0).rate == k.sigma_plus);
    CHECK(m_tail(p).rate == 1.0 / k.zeta_minus);
    CHECK(mtilde_tail(p).rate == 1.0 / k.zeta_minus);
    CHECK(j_tail(p).rate == 1.0 / k.zeta_minus);
    CHECK(j_tail(p).prefactor == k.k_q);
    CHECK(j_tail(p).power == 2.5);
  }
}

TEST_CASE("discrete tail laws against exact pmfs") {
  // M reaches the law at the far-tail index; M~ and J carry a 1/m correction,
  // so the ratio is checked to rise monotonically and settle further out.
  for (const auto& p : testing::random_params(10, 42, 0.05, 0.9)) {
    const auto lm = m_tail(p);
    const std::size_t i0 = far_tail_index(lm, 1);
    const auto m = m_pmf(p, 8 * i0, {1.0});
    CHECK(std::fabs(m.at(i0) / lm(i0) - 1.0) <= 0.05);

    const auto lt = mtilde_tail(p);
    const auto t = mtilde_pmf_tail_sum(p, 8 * i0, {1.0});
    double prev = 0.0;
    for (std::size_t i : {i0, 2 * i0, 4 * i0, 8 * i0}) {
      const double r = t.at(i) / lt(i);
      CHECK(r > prev);
      CHECK(r < 1.0);
      prev = r;
    }
    CHECK(std::fabs(prev - 1.0) <= 0.05);
  }
}

TEST_CASE("J tail law") {
  const auto law = j_tail(light);
  const auto j = j_pmf(light, 1600);
  double prev = 0.0;
  for (std::size_t i : {100, 200, 400, 800, 1600}) {
    const double r = j.at(i) / law(i);
    CHECK(r > prev);
    prev = r;
  }
  CHECK(std::fabs(prev - 1.0) < 0.05);
  const auto probe = probe_ratio_convergence([&](std::size_t i) { return j.at(i); }, law, 100, 0.05, 1600);
  CHECK(probe.converged);
  CHECK(probe.index == 800);
}

TEST_CASE("far-tail index") {
  const auto law = m_tail(light);
  const std::size_t i = far_tail_index(law, 1);
  CHECK(std::pow(law.rate, static_cast<double>(i - 1)) <= 1e-6);
  CHECK(std::pow(law.rate, static_cast<double>(i - 2)) > 1e-6);
  CHECK_THROWS_AS(far_tail_index(busy_tail(light), 1), DomainError);
}

TEST_CASE("residual busy-period tail and the T~/T ratio") {
  const auto k = spectral_constants(light);
  CHECK(residual_vs_full_ratio(light) == Approx(0.49 / 0.143188419493).epsilon(1e-10));
  CHECK(residual_vs_full_ratio(light) == Approx(3.4220).epsilon(1e-4));
  CHECK(residual_busy_tail(light).prefactor / busy_tail(light).prefactor ==
        Approx(residual_vs_full_ratio(light)).epsilon(1e-10));
  // T~ prefactor from the square-root coefficient S_q: C = S_q / (2 sqrt(pi) sigma+).
  CHECK(residual_busy_tail(light).prefactor == Approx(k.s_q / (2.0 * std::sqrt(M_PI) * k.sigma_plus)).epsilon(1e-12));
  for (const auto& p : testing::random_params(1000, 43, 0.001, 0.999)) {
    CHECK(residual_vs_full_ratio(p) > 1.0);
    CHECK(residual_busy_tail(p).prefactor / busy_tail(p).prefactor ==
          Approx(residual_vs_full_ratio(p)).epsilon(1e-10));
  }
}

TEST_CASE("Omega~ tail law") {
  const auto k = spectral_constants(light);
  // L_q = U'(T_q) S_q, U' the derivative of the rational map t -> U.
  const double h = 1e-6;
  const double du = (interdeparture_from_residual(light, k.t_q + h) - interdeparture_from_residual(light, k.t_q - h)) / (2 * h);
  CHECK(k.l_q == Approx(du * k.s_q).epsilon(1e-7));
  const auto law = omega_tail(light, 10.8899);
  CHECK(law.prefactor > 0.0);
  CHECK(law.prefactor == Approx(10.8899 * k.l_q / (2.0 * k.sigma_plus * std::sqrt(M_PI))).epsilon(1e-15));
  CHECK(law.rate == busy_tail(light).rate);
  CHECK_THROWS_AS(omega_tail(light, 0.0), DomainError);
  CHECK_THROWS_AS(omega_tail(light, INFINITY), DomainError);
  for (const auto& p : testing::random_params(1000, 44, 0.001, 0.999)) {
    CHECK_NOTHROW(omega_tail(p, 1.0));
  }
}

TEST_CASE("tail-law evaluation is log-space") {
  const auto law = j_tail(params_from_load(0.7, 0.7));
  CHECK(law(5e4) > 0.0);
  CHECK(law(5e4) == Approx(std::exp(law.log_value(5e4))).epsilon(1e-14));
  CHECK(std::isfinite(law.log_value(1e9)));
}
