#include <doctest.h>

#include <cmath>
#include <vector>

#include "batchps/kernels.hpp"
#include "batchps/rng.hpp"
#include "batchps/summation.hpp"

using namespace batchps;
using doctest::Approx;

TEST_CASE("compensated sums") {
  // 1 + 1e100 + 1 - 1e100 loses both ones in plain summation.
  CompensatedSum s;
  for (double x : {1.0, 1e100, 1.0, -1e100}) s += x;
  CHECK(s.value() == 2.0);

  double naive = 0.0;
  CompensatedSum c;
  for (int i = 0; i < 10'000'000; ++i) {
    naive += 0.1;
    c += 0.1;
  }
  CHECK(std::fabs(c.value() - 1e6) < std::fabs(naive - 1e6));
  CHECK(c.value() == Approx(1e6).epsilon(1e-15));

  SignSplitSum split;
  for (double x : {3.0, -2.0, 0.5, -1.5}) split += x;
  CHECK(split.value() == 0.0);
  CHECK(split.magnitude() == 7.0);
  CHECK(split.positive() == 3.5);
  CHECK(split.negative() == -3.5);
  CHECK(compensated_sum(std::vector<double>{1e16, 1.0, -1e16}) == 1.0);
}

TEST_CASE("convolution matches the serial reference") {
  RandomStream g(5, 5);
  for (std::size_t na : {0u, 1u, 7u, 300u, 2000u}) {
    for (std::size_t nout : {1u, 64u, 1500u}) {
      std::vector<double> a(na), b(nout + 3);
      for (auto& x : a) x = g.uniform() - 0.5;
      for (auto& x : b) x = g.uniform();
      if (na > 2) a[0] = a[1] = 0.0;  // leading zeros are skipped
      std::vector<double> par(nout), ref(nout);
      kernels::convolve_truncated(a, b, par);
      kernels::reference::convolve_truncated(a, b, ref);
      for (std::size_t m = 0; m < nout; ++m) {
        double direct = 0.0;
        for (std::size_t i = 0; i <= m && i < na; ++i) direct += a[i] * b[m - i];
        REQUIRE(ref[m] == Approx(direct).epsilon(1e-12).scale(1.0));
        REQUIRE(par[m] == Approx(ref[m]).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("convolution of geometric sequences") {
  // (sum x^k)^2 has coefficients (m+1) x^m.
  std::vector<double> a(200);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::pow(0.9, k);
  std::vector<double> out(200);
  kernels::convolve_truncated(a, a, out);
  for (std::size_t m = 0; m < out.size(); ++m) CHECK(out[m] == Approx((m + 1) * std::pow(0.9, m)));
}

TEST_CASE("suffix sums") {
  std::vector<double> w{1e-20, 1.0, 1e-20, 2.0, 0.5};
  std::vector<double> out(w.size());
  kernels::suffix_sums(w, out);
  CHECK(out[4] == 0.5);
  CHECK(out[3] == 2.5);
  CHECK(out[1] == 3.5);
  CHECK(out[0] == Approx(3.5 + 2e-20));

  // Geometric tail: sum_{k >= m} x^k = x^m / (1 - x) up to truncation.
  std::vector<double> geo(5000), tail(5000);
  for (std::size_t k = 0; k < geo.size(); ++k) geo[k] = std::pow(0.99, k);
  kernels::suffix_sums(geo, tail);
  for (std::size_t m : {0u, 10u, 1000u, 4000u}) {
    const double exact = (std::pow(0.99, m) - std::pow(0.99, 5000)) / 0.01;
    CHECK(tail[m] == Approx(exact).epsilon(1e-12));
  }
}
