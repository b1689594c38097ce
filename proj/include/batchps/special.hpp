#pragma once

namespace batchps::special {

/// Modified Bessel function of the first kind, order one.
double bessel_i1(double x);

/// Exponentially scaled I1: e^{-|x|} I1(x). Finite for every finite x.
double bessel_i1_scaled(double x);

}  // namespace batchps::special
