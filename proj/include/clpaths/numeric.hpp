#pragma once

#include <complex>

namespace clpaths {

/// Integer power by repeated squaring, with x^0 = 1 for every x (including 0).
template <class T>
T ipow(const T& x, int n) {
  if (n < 0) return T(1) / ipow(x, -n);
  T result(1);
  T base = x;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

/// Generalized binomial coefficient C(n, k) = n (n-1) ... (n-k+1) / k! for any
/// integer n and k >= 0; zero for k < 0.
template <class T>
T binom(long n, long k) {
  if (k < 0) return T(0);
  T c(1);
  for (long i = 0; i < k; ++i) {
    c *= T(n - i);
    c /= T(i + 1);
  }
  return c;
}

}  // namespace clpaths
