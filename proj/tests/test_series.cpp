#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "batchps/asymptotics.hpp"
#include "batchps/errors.hpp"
#include "batchps/series.hpp"
#include "batchps/simulator.hpp"
#include "batchps/summary.hpp"
#include "random_params.hpp"

using namespace batchps;
using doctest::Approx;

namespace {

const ModelParams light = validate_params(0.21, 0.3);
const ModelParams heavy = params_from_load(0.7, 0.7);

double poly(const DiscretePmf& pmf, double z) {
  double acc = 0.0;
  for (std::size_t i = pmf.mass.size(); i-- > 0;) acc = acc * z + pmf.mass[i];
  return acc * std::pow(z, static_cast<double>(pmf.offset));
}

}  // namespace

TEST_CASE("M pmf") {
  const auto m = m_pmf(light, 400);
  CHECK(m.offset == 1);
  CHECK(m.at(0) == 0.0);
  // One job, service Exp(1) beats the next arrival Exp(rho).
  CHECK(m.at(1) == Approx(0.7 * (1.0 / (1.0 + 0.21))).epsilon(1e-15));
  CHECK(m.at(1) == Approx(0.57851).epsilon(1e-5));
  CHECK(std::fabs(m.tail_mass) < 1e-12);
  CHECK(poly(m, 0.5) == Approx(jobs_pgf(light, 0.5)).epsilon(1e-14));
  CHECK(poly(m, 1.1) == Approx(jobs_pgf(light, 1.1)).epsilon(1e-12));
  const double ratio = m.at(200) / m_tail(light)(200.0);
  CHECK(std::fabs(ratio - 1.0) < 0.05);
  for (double v : m.mass) CHECK(v >= 0.0);
  CHECK_THROWS_AS(m_pmf(light, 5), TruncationTooSmall);
}

TEST_CASE("M moment matches dM*/dz at 1") {
  for (const auto& p : {light, heavy, params_from_load(0.5, 0.1)}) {
    const auto m = m_pmf(p, 4 * adaptive_m_max(p, 1e-14), {1.0});
    // Tail correction from the law: sum_{i > n} i law(i).
    const auto law = m_tail(p);
    double corr = 0.0;
    for (std::size_t i = m.last_index() + 1; i < m.last_index() + 200000; ++i) corr += i * law(i);
    CHECK(m.mean() + corr == Approx(1.0 / ((1.0 - p.q()) * (1.0 - p.rho_star()))).epsilon(1e-6));
  }
}

TEST_CASE("N0 pmf expands eta") {
  const auto n0 = n0_pmf(light, 400);
  CHECK(n0.at(0) == Approx(0.7).epsilon(1e-15));
  CHECK(std::fabs(n0.tail_mass) < 1e-14);
  for (int i = 0; i < 10; ++i) {
    const double z = 0.1 * i + 0.05;
    CHECK(poly(n0, z) == Approx(n0_pgf(light, z)).epsilon(1e-13));
  }
  const auto n0h = n0_pmf(heavy, 4000);
  CHECK(std::fabs(n0h.tail_mass) < 1e-13);
  CHECK(poly(n0h, 0.9) == Approx(n0_pgf(heavy, 0.9)).epsilon(1e-12));
}

TEST_CASE("conditional M~ table") {
  const auto t = conditional_mtilde_table(light, 6, 300);
  for (std::size_t k = 1; k <= 6; ++k) {
    for (std::size_t m = 0; m < k; ++m) CHECK(t(k, m) == 0.0);
    double row = 0.0;
    for (std::size_t m = 0; m <= 300; ++m) row += t(k, m);
    CHECK(row <= 1.0 + 1e-12);
  }
  // A single job finishes before any arrival.
  CHECK(t(1, 1) == Approx(1.0 / 1.21).epsilon(1e-15));
  CHECK(t(1, 1) == Approx(0.82645).epsilon(1e-5));
  CHECK(std::fabs(t.remainder(3)) < 1e-10);
  double row3 = t.remainder(3);
  for (std::size_t m = 0; m <= 300; ++m) row3 += t(3, m);
  CHECK(row3 == Approx(1.0).epsilon(1e-10));
  // Row k against the conditional transform at s = 0.
  for (double r : {0.3, 0.9}) {
    double acc = 0.0;
    for (std::size_t m = 300; m-- > 0;) acc = acc * r + t(4, m);
    CHECK(acc == Approx(joint_conditional_transform(light, 1, 3, r, 0.0)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(conditional_mtilde_table(light, 50, 40), TruncationTooSmall);
}

TEST_CASE("square-root coefficients and b_k") {
  const auto a = sqrt_coefficients(3);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == -0.5);
  CHECK(a[2] == -0.125);
  CHECK(a[3] == Approx(-1.0 / 16.0).epsilon(1e-15));
  const auto s = b_series(light, 200);
  CHECK(s.b[0] == 1.0);
  CHECK(std::fabs(s.identity_residual) < 1e-10);
  CHECK(s.remainder_bound < 1e-20);
}

TEST_CASE("M~ by the tail-sum route") {
  const auto c = mtilde_pmf_tail_sum(light, 200);
  CHECK(c.at(0) == 0.0);
  CHECK(c.at(1) == Approx(0.49 / 1.21).epsilon(1e-12));
  CHECK(poly(c, 0.8) == Approx(residual_jobs_pgf(light, 0.8)).epsilon(1e-13));
  CHECK(std::fabs(c.tail_mass) < 1e-10);
  for (double v : c.mass) CHECK(v >= 0.0);
}

TEST_CASE("M~ two routes agree on 20 random pairs") {
  for (const auto& p : testing::random_params(20, 21)) {
    const auto c = mtilde_pmf_tail_sum(p, 200, {1.0});
    const auto d = mtilde_pmf_composition(p, 200, {1.0});
    CHECK(std::fabs(b_series(p, 200).identity_residual) < 1e-10);
    double diff = 0.0;
    for (std::size_t i = 0; i < 200; ++i) diff = std::max(diff, std::fabs(c.mass[i] - d.mass[i]));
    CHECK(diff <= 1e-10);
    CHECK(c.tail_mass == Approx(d.tail_mass).epsilon(1e-6));
  }
}

TEST_CASE("M~ composition normalizes") {
  const auto d = mtilde_pmf_composition(light, adaptive_m_max(light));
  CHECK(d.at(0) == 0.0);
  CHECK(std::fabs(d.tail_mass) < 1e-10);
  CHECK(d.tail_mass > -1e-12);
}

TEST_CASE("conditional J law") {
  const auto u = j_conditional_pmf(1, 7);
  for (std::size_t j = 1; j <= 7; ++j) CHECK(u.at(j) == Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK(j_conditional_pmf(2, 4).at(3) == Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(j_conditional_pmf(5, 4), DomainError);
  CHECK_THROWS_AS(j_conditional_pmf(0, 4), DomainError);
  for (std::uint64_t m = 1; m <= 60; ++m) {
    for (std::uint64_t b = 1; b <= m; ++b) {
      const auto pmf = j_conditional_pmf(b, m);
      CHECK(std::fabs(pmf.tail_mass) <= 1e-14);
      CHECK(pmf.mean() == Approx(static_cast<double>(b * (m + 1)) / static_cast<double>(b + 1)).epsilon(1e-12));
    }
  }
}

TEST_CASE("conditional J law by enumeration of placements") {
  for (unsigned m = 1; m <= 12; ++m) {
    std::vector<std::vector<double>> count(m + 1, std::vector<double>(m + 1, 0.0));
    std::vector<double> subsets(m + 1, 0.0);
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
      const unsigned b = std::popcount(mask);
      const unsigned top = 32 - std::countl_zero(mask);
      count[b][top] += 1.0;
      subsets[b] += 1.0;
    }
    for (unsigned b = 1; b <= m; ++b) {
      const auto pmf = j_conditional_pmf(b, m);
      double mean = 0.0;
      for (unsigned j = 1; j <= m; ++j) {
        CHECK(pmf.at(j) == Approx(count[b][j] / subsets[b]).epsilon(1e-14));
        mean += j * count[b][j] / subsets[b];
      }
      CHECK(mean == Approx(b * (m + 1.0) / (b + 1.0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("unconditional J law") {
  const auto j = j_pmf(light, adaptive_j_max(light));
  CHECK(j.at(0) == 0.0);
  CHECK(std::fabs(j.tail_mass) < 1e-8);
  for (double v : j.mass) CHECK(v >= 0.0);
  // Table route over (n, b) with explicit N0 weights.
  const auto table = conditional_mtilde_table(light, 80, 500, {1.0});
  const auto jt = j_pmf_from_table(light, table, 40);
  for (std::size_t i = 1; i <= 40; ++i) CHECK(jt.at(i) == Approx(j.at(i)).epsilon(1e-11));
  // P(J = 1) = sum_n P(N0=n) sum_m (1-q) g_{n+1}(m) / m.
  double p1 = 0.0;
  const auto n0 = n0_pmf(light, 79);
  for (std::size_t n = 0; n < 80; ++n) {
    for (std::size_t m = 1; m <= 500; ++m) p1 += n0.mass[n] * 0.7 * table(n + 1, m) / static_cast<double>(m);
  }
  CHECK(j.at(1) == Approx(p1).epsilon(1e-12));
}

TEST_CASE("J truncation reports the dominant remainder") {
  JPmfOptions o;
  o.m_cutoff = 1e-2;
  o.policy.max_tail = 1e-14;
  try {
    j_pmf(light, 20, o);
    FAIL("no truncation error");
  } catch (const TruncationTooSmall& e) {
    CHECK(e.dominant() == "m");
    CHECK(e.remainder() > 1e-14);
  }
  JPmfOptions ob;
  ob.batch_cutoff = 1e-3;
  try {
    j_pmf(light, 40, ob);
    FAIL("no truncation error");
  } catch (const TruncationTooSmall& e) {
    CHECK(e.dominant() == "b");
  }
}

TEST_CASE("K_q closed form against the deconditioned sum") {
  CHECK(k_q_deconditioned(light) == Approx(spectral_constants(light).k_q).epsilon(1e-8));
  for (const auto& p : testing::random_params(10, 31, 0.05, 0.9)) {
    CHECK(k_q_deconditioned(p) == Approx(spectral_constants(p).k_q).epsilon(1e-8));
  }
}

TEST_CASE("H_q") {
  DiscretePmf point{"J", 1, {1.0}, 0.0};
  CHECK(h_q(light, point, {1.0, false}).value == 1.0);
  const auto k = spectral_constants(light);
  CHECK(k.u_star / k.zeta_minus == Approx(0.99516).epsilon(1e-5));

  const auto est = h_q(light, j_pmf(light, 800));
  CHECK(est.value == Approx(10.8899).epsilon(2e-4));
  CHECK(est.remainder_bound < 1e-3);
  const auto coarse = h_q_analytic(light);
  CHECK(std::fabs(coarse.value - est.value) <= coarse.remainder_bound + est.remainder_bound);

  // Simulated J histogram. J u^(J-1) has infinite variance (u*^2 > zeta^-), so
  // the two routes are compared on partial sums over j <= j_c, where every
  // cell has at least 100 expected counts.
  SimConfig sc{.params = light};
  sc.replications = 1'000'000;
  sc.seed = 5;
  SummaryAccumulator acc(false);
  simulate_tagged(sc, [&](std::span<const TaggedBatchRecord> b) { acc.add(b); });
  const auto& hist = acc.summary().j_sampled;
  const auto exact = j_pmf(light, 200);
  std::uint64_t j_c = 1;
  while (exact.at(j_c + 1) * hist.total() >= 100.0) ++j_c;
  CHECK(j_c >= 15);
  double sim_part = 0.0, second = 0.0, exact_part = 0.0;
  for (std::uint64_t j = 1; j <= j_c; ++j) {
    const double g = j * std::pow(k.u_star, j - 1.0);
    sim_part += hist.pmf(j) * g;
    second += hist.pmf(j) * g * g;
    exact_part += exact.at(j) * g;
  }
  const double se = std::sqrt((second - sim_part * sim_part) / static_cast<double>(hist.total()));
  CHECK(std::fabs(sim_part - exact_part) <= 3.0 * se);
  // The full empirical sum stops at the largest observed J and falls short.
  CHECK(h_q(light, empirical_pmf(hist, "J"), {1.0, false}).value < est.value);
}

TEST_CASE("adaptive truncation orders") {
  const std::size_t m = adaptive_m_max(light);
  const auto law = mtilde_tail(light);
  CHECK(law(static_cast<double>(m + 1)) < 1e-10);
  CHECK(adaptive_j_max(light) < adaptive_j_max(heavy));
  CHECK(std::fabs(mtilde_pmf_composition(heavy, adaptive_m_max(heavy)).tail_mass) < 1e-10);
}
