#include "clpaths/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace clpaths {

namespace {

using cplx = std::complex<double>;

// Kronrod abscissae (nonnegative half) and weights; odd entries are the
// embedded 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Interval {
  double a, b;
  cplx value;
  double err;
  double l1;
  bool operator<(const Interval& o) const { return err < o.err; }
};

Interval rule(const std::function<cplx(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const cplx fc = f(c);
  cplx k = fc * kWgk[7];
  cplx g = fc * kWg[3];
  double l1 = std::abs(fc) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const cplx f1 = f(c - dx);
    const cplx f2 = f(c + dx);
    k += kWgk[j] * (f1 + f2);
    l1 += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::abs((k - g) * h), l1 * std::abs(h)};
}

}  // namespace

QuadratureEstimate gauss_kronrod(const std::function<cplx(double)>& f, double a, double b,
                                 double abs_tol, double rel_tol, int max_intervals) {
  std::priority_queue<Interval> heap;
  Interval first = rule(f, a, b);
  cplx total = first.value;
  double err = first.err;
  double l1 = first.l1;
  heap.push(first);
  int count = 1;
  // Rounding floor: the estimate cannot drop much below eps * l1.
  auto target = [&] { return std::max({abs_tol, rel_tol * l1, 50.0 * 2.2e-16 * l1}); };
  while (err > target() && count < max_intervals) {
    Interval worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      heap.push(worst);
      break;
    }
    Interval left = rule(f, worst.a, mid);
    Interval right = rule(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.err + right.err - worst.err;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Recompute sums from the leaves to remove accumulated drift.
  total = 0.0;
  err = 0.0;
  l1 = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().err;
    l1 += heap.top().l1;
    heap.pop();
  }
  return {total, err, l1, err <= target()};
}

}  // namespace clpaths
