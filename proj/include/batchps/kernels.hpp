#pragma once

// Data-parallel inner loops of the series engine. Each kernel has an OpenMP
// version (used by the library) and a serial reference kept for tests and the
// benchmark. The two differ only in the order of floating-point additions.

#include <span>

namespace batchps::kernels {

/// out[m] = sum_{i + k = m} a[i] * b[k] for every m < out.size(); terms with
/// indices past the end of a or b are zero. out must not alias a or b.
void convolve_truncated(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// out[m] = sum_{k >= m} w[k] for every m < w.size(), compensated,
/// accumulated from the highest index down.
void suffix_sums(std::span<const double> w, std::span<double> out);

namespace reference {

void convolve_truncated(std::span<const double> a, std::span<const double> b, std::span<double> out);

}  // namespace reference

}  // namespace batchps::kernels
