#include "clpaths/exact.hpp"

#include <cmath>

namespace clpaths {

std::optional<mpq_class> rational_approximation(double x, long max_den, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  // Convergents h/k of the continued fraction of x.
  mpz_class h_prev(1), h(static_cast<long>(std::floor(x)));
  mpz_class k_prev(0), k(1);
  double frac = x - std::floor(x);
  for (int iter = 0; iter < 64; ++iter) {
    const mpq_class q(h, k);
    if (std::abs(q.get_d() - x) <= tol * std::max(1.0, std::abs(x))) return mpq_class(h, k);
    if (frac < 1e-300) break;
    const double inv = 1.0 / frac;
    const double a = std::floor(inv);
    frac = inv - a;
    const mpz_class ai(static_cast<long>(a));
    mpz_class h_next = ai * h + h_prev;
    mpz_class k_next = ai * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  const mpq_class q(h, k);
  if (std::abs(q.get_d() - x) <= tol * std::max(1.0, std::abs(x))) return mpq_class(h, k);
  return std::nullopt;
}

std::optional<GaussRational> gauss_rational(std::complex<double> z, long max_den, double tol) {
  auto re = rational_approximation(z.real(), max_den, tol);
  auto im = rational_approximation(z.imag(), max_den, tol);
  if (!re || !im) return std::nullopt;
  return GaussRational(*re, *im);
}

}  // namespace clpaths
