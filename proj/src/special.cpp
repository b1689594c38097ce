#include "batchps/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace batchps::special {
namespace {

// Ascending series and the Hankel expansion agree to ~1e-13 relative here.
constexpr double kCrossover = 15.0;

// e^{-x} I1(x) from the ascending series; x >= 0. All terms are positive.
double i1_series_scaled(double x) {
  const double quarter_x2 = 0.25 * x * x;
  double term = 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= quarter_x2 / (static_cast<double>(k) * static_cast<double>(k + 1));
    sum += term;
    if (term < std::numeric_limits<double>::epsilon() * sum) break;
  }
  return sum * std::exp(-x);
}

// e^{-x} I1(x) from the large-argument expansion
//   I1(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k prod_{i<=k} (4 - (2i-1)^2) / (8 i x),
// summed until the terms stop shrinking (optimal truncation).
double i1_asymptotic_scaled(double x) {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * -(4.0 - odd * odd) / (8.0 * k * x);
    if (std::fabs(next) >= std::fabs(term)) break;
    term = next;
    sum += term;
    if (std::fabs(term) < 0.5 * std::numeric_limits<double>::epsilon() * std::fabs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace

double bessel_i1_scaled(double x) {
  const double ax = std::fabs(x);
  const double value = ax <= kCrossover ? i1_series_scaled(ax) : i1_asymptotic_scaled(ax);
  return x < 0.0 ? -value : value;
}

double bessel_i1(double x) {
  const double ax = std::fabs(x);
  return bessel_i1_scaled(x) * std::exp(ax);
}

}  // namespace batchps::special
