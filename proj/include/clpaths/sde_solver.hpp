#pragma once

#include <compare>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clpaths/contour.hpp"
#include "clpaths/density.hpp"
#include "clpaths/exact.hpp"
#include "clpaths/numeric.hpp"

namespace clpaths {

/// One unknown of the moment recursion:
///   E: <z^n> (or <omega^n>), index = n
///   F: <1/p_l>, index = l
///   G: <1/q_m^r>, index = m, power = r
struct Slot {
  enum class Kind { E, F, G };
  Kind kind = Kind::E;
  int index = 0;
  int power = 0;

  static Slot e(int n) { return {Kind::E, n, 0}; }
  static Slot f(int l) { return {Kind::F, l, 0}; }
  static Slot g(int m, int r) { return {Kind::G, m, r}; }

  auto operator<=>(const Slot&) const = default;
  std::string name() const;
};

/// Coefficients of a linear functional on the Schwinger-Dyson space.
struct MomentVector {
  std::map<int, cplx> E;
  std::map<int, cplx> F;
  std::map<std::pair<int, int>, cplx> G;
  /// Optional per-slot magnitude scale (for path functionals: the integral of
  /// |rho w| along the path); used to make residuals scale-free.
  std::map<Slot, double> scale;

  std::optional<cplx> get(const Slot& s) const;
  void set(const Slot& s, cplx v);
};

/// z^n / (z - b)^r expanded on {z^i} (key i of `e`, negative i meaning 1/z^|i|)
/// and {1/(z - b)^j} (key j of `q`, 1 <= j <= r). Valid for every integer n;
/// negative n requires b != 0.
template <class T>
struct PoleReduction {
  std::map<int, T> e;
  std::map<int, T> q;
};

template <class T>
PoleReduction<T> reduce_monomial_over_pole(int n, const T& b, int r) {
  PoleReduction<T> out;
  if (n >= 0) {
    // Quotient: sum_i C(n-1-i, r-1) b^{n-r-i} z^i; remainder: C(n, j) b^{n-j} / q^{r-j}.
    for (int i = 0; i <= n - r; ++i) out.e[i] = binom<T>(n - 1 - i, r - 1) * ipow(b, n - r - i);
    for (int j = 0; j <= std::min(n, r - 1); ++j) out.q[r - j] = binom<T>(n, j) * ipow(b, n - j);
  } else {
    for (int j = 1; j <= -n; ++j) out.e[-j] = binom<T>(-r, -n - j) * ipow(T(0) - b, n - r + j);
    for (int j = 1; j <= r; ++j) out.q[j] = binom<T>(n, r - j) * ipow(b, n - r + j);
  }
  return out;
}

/// Truncated Schwinger-Dyson system: row k is the reduction of <A z^n> (Line,
/// n = 0..n_max) or <-i A omega^n> (Cylinder, n = -n_max..n_max).
template <class T>
struct BasicSdeSystem {
  Mode mode = Mode::Line;
  int n_max = 0;
  bool steady = false;  // n_max is past the transient of the recursion
  std::vector<Slot> variables;
  std::vector<int> n_range;
  std::vector<std::vector<std::pair<int, T>>> rows;  // (variable index, coefficient)

  /// Equivalent sparse form used for rank decisions. Auxiliary unknowns
  /// <z^n / (z - b)^r> (indices >= variables.size()) are tied to the slots by
  /// z^n/(z-b)^r = b z^{n-1}/(z-b)^r + z^{n-1}/(z-b)^{r-1}, which determines
  /// each of them uniquely, so the nullspace restricted to the slots is the
  /// same as that of `rows`.
  int n_aux = 0;
  std::vector<std::vector<std::pair<int, T>>> chain_rows;
};

using SdeSystem = BasicSdeSystem<cplx>;
using ExactSdeSystem = BasicSdeSystem<GaussRational>;

/// Smallest n_max for which the recursion is in its one-new-variable regime.
int steady_threshold(const Density& d);
/// 4 (N_q + sum beta + N_p + |gamma| + 4), capped at 2048.
int default_n_max(const Density& d);

SdeSystem build_system(const Density& d, int n_max);

/// Exact-arithmetic build, available when every density parameter is
/// Gaussian-rational (denominators up to 10^6).
std::optional<ExactSdeSystem> build_exact_system(const Density& d, int n_max);

/// Dense copy of the coefficient matrix.
std::vector<std::vector<cplx>> dense_rows(const SdeSystem& sys);

struct CorankResult {
  int n_sde = 0;
  std::vector<MomentVector> basis;  // unit-norm nullspace vectors
  std::vector<double> pivots;       // remaining max-norm of each row after reduction
};

/// Nullspace dimension of the sparse chain form by ordered row reduction: each
/// max-normalized row is reduced against the earlier independent rows and
/// counts as dependent when its remainder is at most tol_rank. The basis holds
/// one back-substituted null vector per free column, restricted to the slots.
CorankResult corank(const SdeSystem& sys, double tol_rank = 1e-8);

/// Exact nullspace dimension by fraction-exact Gaussian elimination.
int exact_corank(const ExactSdeSystem& sys);

struct DimensionReport {
  int n_gamma = 0;
  std::vector<int> n_max;
  std::vector<int> n_sde;
  std::vector<bool> steady;
  bool stabilized = false;
  bool pass = false;
  std::optional<int> exact_n_sde;  // exact corank at the smallest steady n_max, when available
  int exact_n_max = 0;
  CorankResult final;               // corank at the largest n_max
};

/// census + build_system + corank over increasing n_max. A single-entry list
/// is extended by 2 n_max. Throws NotStabilized when the window is not steady
/// or the corank differs between the two largest n_max.
DimensionReport dimension_check(const Density& d, std::vector<int> n_max_list, double tol_rank = 1e-8);

/// Weight function of a slot: z^n, 1/p_l or 1/q_m^r (in the natural variable).
cplx slot_weight(const Density& d, const Slot& s, cplx z);

/// Quadrature-evaluated moments of T_gamma for every slot of build_system(d, n_max).
MomentVector moments_of_functional(const Density& d, const PathSpec& p, int n_max,
                                   const QuadratureConfig& cfg = {});

/// Per-row relative residual |sum c_i m_i| / sum |c_i| (|m_i| + scale_i).
std::vector<double> residuals(const SdeSystem& sys, const MomentVector& m);

/// Numerical rank of a set of moment vectors restricted to the slots of sys,
/// after column equilibration, with relative threshold tol.
int moment_rank(const SdeSystem& sys, const std::vector<MomentVector>& moments, double tol = 1e-6);

/// Residual of row `row` after least-squares projection onto the span of the
/// preceding rows, relative to the row norm (both rows max-normalized).
double in_span_residual(const SdeSystem& sys, std::size_t row);

}  // namespace clpaths
