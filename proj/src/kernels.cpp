#include "batchps/kernels.hpp"

#include <algorithm>
#include <cstddef>

#include "batchps/summation.hpp"

namespace batchps::kernels {
namespace {

std::size_t first_nonzero(std::span<const double> v) {
  std::size_t i = 0;
  while (i < v.size() && v[i] == 0.0) ++i;
  return i;
}

}  // namespace

void convolve_truncated(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  const std::ptrdiff_t n_out = static_cast<std::ptrdiff_t>(out.size());
  const std::ptrdiff_t a_lo = static_cast<std::ptrdiff_t>(first_nonzero(a));
  const std::ptrdiff_t b_lo = static_cast<std::ptrdiff_t>(first_nonzero(b));
  const std::ptrdiff_t a_hi = static_cast<std::ptrdiff_t>(a.size()) - 1;
  const std::ptrdiff_t b_hi = static_cast<std::ptrdiff_t>(b.size()) - 1;
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t m = 0; m < n_out; ++m) {
    const std::ptrdiff_t lo = std::max(a_lo, m - b_hi);
    const std::ptrdiff_t hi = std::min(a_hi, m - b_lo);
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::ptrdiff_t i = lo; i <= hi; ++i) acc += pa[i] * pb[m - i];
    po[m] = acc;
  }
}

void suffix_sums(std::span<const double> w, std::span<double> out) {
  CompensatedSum acc;
  for (std::size_t k = w.size(); k-- > 0;) {
    acc += w[k];
    out[k] = acc.value();
  }
}

namespace reference {

void convolve_truncated(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  for (std::size_t m = 0; m < out.size(); ++m) {
    double acc = 0.0;
    for (std::size_t i = 0; i <= m && i < a.size(); ++i) {
      if (m - i < b.size()) acc += a[i] * b[m - i];
    }
    out[m] = acc;
  }
}

}  // namespace reference

}  // namespace batchps::kernels
