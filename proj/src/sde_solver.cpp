#include "clpaths/sde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "clpaths/errors.hpp"

namespace clpaths {

std::string Slot::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::E: os << "E" << index; break;
    case Kind::F: os << "F" << index; break;
    case Kind::G: os << "G" << index << "," << power; break;
  }
  return os.str();
}

std::optional<cplx> MomentVector::get(const Slot& s) const {
  switch (s.kind) {
    case Slot::Kind::E: {
      auto it = E.find(s.index);
      if (it == E.end()) return std::nullopt;
      return it->second;
    }
    case Slot::Kind::F: {
      auto it = F.find(s.index);
      if (it == F.end()) return std::nullopt;
      return it->second;
    }
    case Slot::Kind::G: {
      auto it = G.find({s.index, s.power});
      if (it == G.end()) return std::nullopt;
      return it->second;
    }
  }
  return std::nullopt;
}

void MomentVector::set(const Slot& s, cplx v) {
  switch (s.kind) {
    case Slot::Kind::E: E[s.index] = v; break;
    case Slot::Kind::F: F[s.index] = v; break;
    case Slot::Kind::G: G[{s.index, s.power}] = v; break;
  }
}

namespace {

template <class T>
bool is_zero(const T& v) {
  if constexpr (std::is_same_v<T, GaussRational>)
    return v.is_zero();
  else
    return v == T(0);
}

template <class T>
struct Params {
  Mode mode = Mode::Line;
  int gamma = 0;
  std::vector<T> a;
  std::vector<int> alpha;
  std::vector<std::optional<std::size_t>> coincide;
  std::map<int, T> c;
  std::vector<T> b;
  std::vector<std::vector<T>> dcoef;
};

template <class T, class Convert>
std::optional<Params<T>> convert_params(const Density& d, Convert conv) {
  Params<T> p;
  p.mode = d.mode();
  p.gamma = d.gamma_power();
  for (std::size_t l = 0; l < d.poly_factors().size(); ++l) {
    auto v = conv(d.poly_factors()[l].a);
    if (!v) return std::nullopt;
    p.a.push_back(*v);
    p.alpha.push_back(d.poly_factors()[l].alpha);
    p.coincide.push_back(d.coinciding_principal(l));
  }
  for (const auto& [k, ck] : d.exp_poly()) {
    auto v = conv(ck);
    if (!v) return std::nullopt;
    p.c[k] = *v;
  }
  for (const auto& pp : d.exp_principal()) {
    auto v = conv(pp.b);
    if (!v) return std::nullopt;
    p.b.push_back(*v);
    std::vector<T> ds;
    for (const auto& x : pp.d) {
      auto w = conv(x);
      if (!w) return std::nullopt;
      ds.push_back(*w);
    }
    p.dcoef.push_back(std::move(ds));
  }
  return p;
}

template <class T>
void add_term(std::map<Slot, T>& row, const Slot& s, const T& v) {
  if (is_zero(v)) return;
  auto [it, inserted] = row.try_emplace(s, v);
  if (!inserted) it->second += v;
}

template <class T>
BasicSdeSystem<T> assemble(const Params<T>& p, int n_max, int threshold) {
  BasicSdeSystem<T> sys;
  sys.mode = p.mode;
  sys.n_max = n_max;
  sys.steady = n_max >= threshold;
  const bool line = p.mode == Mode::Line;
  const int n_lo = line ? 0 : -n_max;

  std::vector<std::map<Slot, T>> maps;
  for (int n = n_lo; n <= n_max; ++n) {
    std::map<Slot, T> row;
    // Reduction argument: z^n v (Line) or omega^{n+1} times the pole terms (Cylinder).
    const int nr = line ? n : n + 1;
    if (line) {
      if (n >= 1) add_term(row, Slot::e(n - 1), T(n));
    } else {
      add_term(row, Slot::e(n), T(n + p.gamma));
    }
    for (std::size_t l = 0; l < p.a.size(); ++l) {
      const auto red = reduce_monomial_over_pole<T>(nr, p.a[l], 1);
      const T alpha(p.alpha[l]);
      for (const auto& [i, v] : red.e) add_term(row, Slot::e(i), alpha * v);
      const Slot fs = p.coincide[l] ? Slot::g(static_cast<int>(*p.coincide[l]), 1) : Slot::f(static_cast<int>(l));
      for (const auto& [j, v] : red.q) add_term(row, fs, alpha * v);
    }
    for (const auto& [k, ck] : p.c) {
      if (k == 0) continue;
      add_term(row, Slot::e(line ? n + k - 1 : n + k), T(k) * ck);
    }
    for (std::size_t m = 0; m < p.b.size(); ++m) {
      for (std::size_t ri = 0; ri < p.dcoef[m].size(); ++ri) {
        const int r = static_cast<int>(ri) + 1;
        const T coef = T(0) - T(r) * p.dcoef[m][ri];
        if (is_zero(coef)) continue;
        const auto red = reduce_monomial_over_pole<T>(nr, p.b[m], r + 1);
        for (const auto& [i, v] : red.e) add_term(row, Slot::e(i), coef * v);
        for (const auto& [j, v] : red.q) add_term(row, Slot::g(static_cast<int>(m), j), coef * v);
      }
    }
    std::erase_if(row, [](const auto& kv) { return is_zero(kv.second); });
    maps.push_back(std::move(row));
    sys.n_range.push_back(n);
  }

  // Sparse chain form. Chain c is the pole location loc with depth R; its
  // unknowns are H(r, n) = <w^n / (w - loc)^r>, H(0, n) = E_n, H(r, 0) = base slot.
  struct Chain {
    T loc;
    int depth;
    std::vector<Slot> base;  // r = 1..depth
  };
  std::vector<Chain> chains;
  std::vector<int> chain_of_factor(p.a.size(), -1);
  for (std::size_t m = 0; m < p.b.size(); ++m) {
    Chain ch{p.b[m], static_cast<int>(p.dcoef[m].size()) + 1, {}};
    for (int r = 1; r <= ch.depth; ++r) ch.base.push_back(Slot::g(static_cast<int>(m), r));
    chains.push_back(std::move(ch));
  }
  for (std::size_t l = 0; l < p.a.size(); ++l) {
    if (p.coincide[l]) {
      chain_of_factor[l] = static_cast<int>(*p.coincide[l]);
      continue;
    }
    chain_of_factor[l] = static_cast<int>(chains.size());
    chains.push_back(Chain{p.a[l], 1, {Slot::f(static_cast<int>(l))}});
  }
  const int h_lo = line ? 0 : -n_max + 1;
  const int h_hi = line ? n_max : n_max + 1;

  using Key = std::tuple<int, int, int>;  // chain, r, n with r >= 1 and n != 0
  std::map<Key, int> aux;
  std::vector<std::map<Slot, T>> chain_slot_part;
  std::vector<std::map<int, T>> chain_aux_part;
  struct Ref {
    std::optional<Slot> slot;
    int aux = -1;
  };
  auto href = [&](int c, int r, int n) -> Ref {
    if (r == 0) return {Slot::e(n), -1};
    if (n == 0) return {chains[static_cast<std::size_t>(c)].base[static_cast<std::size_t>(r - 1)], -1};
    auto [it, inserted] = aux.try_emplace(Key{c, r, n}, static_cast<int>(aux.size()));
    return {std::nullopt, it->second};
  };
  auto put = [](std::map<Slot, T>& sp, std::map<int, T>& ap, const Ref& ref, const T& v) {
    if (is_zero(v)) return;
    if (ref.slot)
      add_term(sp, *ref.slot, v);
    else if (auto [it, ins] = ap.try_emplace(ref.aux, v); !ins)
      it->second += v;
  };
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const int ci = static_cast<int>(c);
    for (int r = 1; r <= chains[c].depth; ++r)
      for (int n = h_lo; n <= h_hi; ++n) {
        if (n == 0) continue;
        std::map<Slot, T> sp;
        std::map<int, T> ap;
        const int hi_n = n > 0 ? n : n + 1;  // identity at index hi_n
        put(sp, ap, href(ci, r, hi_n), T(1));
        put(sp, ap, href(ci, r, hi_n - 1), T(0) - chains[c].loc);
        put(sp, ap, href(ci, r - 1, hi_n - 1), T(-1));
        chain_slot_part.push_back(std::move(sp));
        chain_aux_part.push_back(std::move(ap));
      }
  }
  for (int n = n_lo; n <= n_max; ++n) {
    std::map<Slot, T> sp;
    std::map<int, T> ap;
    const int nh = line ? n : n + 1;
    if (line) {
      if (n >= 1) add_term(sp, Slot::e(n - 1), T(n));
    } else {
      add_term(sp, Slot::e(n), T(n + p.gamma));
    }
    for (std::size_t l = 0; l < p.a.size(); ++l) {
      const int c = chain_of_factor[l];
      put(sp, ap, href(c, 1, nh), T(p.alpha[l]));
    }
    for (const auto& [k, ck] : p.c) {
      if (k == 0) continue;
      add_term(sp, Slot::e(line ? n + k - 1 : n + k), T(k) * ck);
    }
    for (std::size_t m = 0; m < p.b.size(); ++m)
      for (std::size_t ri = 0; ri < p.dcoef[m].size(); ++ri) {
        const int r = static_cast<int>(ri) + 1;
        put(sp, ap, href(static_cast<int>(m), r + 1, nh), T(0) - T(r) * p.dcoef[m][ri]);
      }
    chain_slot_part.push_back(std::move(sp));
    chain_aux_part.push_back(std::move(ap));
  }

  // Slots of both forms; the E window is contiguous even where a coefficient
  // happens to vanish.
  std::map<Slot, int> index;
  std::optional<int> e_lo, e_hi;
  auto note = [&](const Slot& s) {
    index.emplace(s, 0);
    if (s.kind == Slot::Kind::E) {
      e_lo = std::min(e_lo.value_or(s.index), s.index);
      e_hi = std::max(e_hi.value_or(s.index), s.index);
    }
  };
  for (const auto& row : maps)
    for (const auto& kv : row) note(kv.first);
  for (const auto& row : chain_slot_part)
    for (const auto& kv : row) note(kv.first);
  if (e_lo)
    for (int i = *e_lo; i <= *e_hi; ++i) index.emplace(Slot::e(i), 0);
  int next = 0;
  for (auto& [slot, idx] : index) {
    idx = next++;
    sys.variables.push_back(slot);
  }
  for (const auto& row : maps) {
    std::vector<std::pair<int, T>> sparse;
    for (const auto& [slot, v] : row) sparse.emplace_back(index.at(slot), v);
    sys.rows.push_back(std::move(sparse));
  }
  sys.n_aux = static_cast<int>(aux.size());
  for (std::size_t i = 0; i < chain_slot_part.size(); ++i) {
    std::vector<std::pair<int, T>> sparse;
    for (const auto& [slot, v] : chain_slot_part[i])
      if (!is_zero(v)) sparse.emplace_back(index.at(slot), v);
    for (const auto& [k, v] : chain_aux_part[i])
      if (!is_zero(v)) sparse.emplace_back(next + k, v);
    sys.chain_rows.push_back(std::move(sparse));
  }
  return sys;
}

int max_beta(const Density& d) {
  int b = 0;
  for (const auto& pp : d.exp_principal()) b = std::max(b, pp.order());
  return b;
}

int sum_abs_alpha(const Density& d) {
  int s = 0;
  for (const auto& f : d.poly_factors()) s += std::abs(f.alpha);
  return s;
}

using SparseRows = std::vector<std::vector<std::pair<int, cplx>>>;

Eigen::MatrixXcd to_dense(const SparseRows& rows, std::size_t nc) {
  Eigen::MatrixXcd A =
      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nc));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& [j, v] : rows[i]) A(static_cast<Eigen::Index>(i), j) = v;
  return A;
}

// Column max-norm scaling of a dense matrix followed by row max-norm scaling.
void normalize_dense(Eigen::MatrixXcd& A) {
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    const double m = A.col(j).cwiseAbs().maxCoeff();
    if (m > 0) A.col(j) *= 1.0 / m;
  }
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double m = A.row(i).cwiseAbs().maxCoeff();
    if (m > 0) A.row(i) *= 1.0 / m;
  }
}

}  // namespace

int steady_threshold(const Density& d) {
  if (d.mode() == Mode::Line) {
    int sum_alpha = 0;
    for (const auto& f : d.poly_factors()) sum_alpha += f.alpha;
    return d.nq() + max_beta(d) + std::max(0, -sum_alpha) + 2;
  }
  return std::max(d.nq_plus(), 0) + std::max(-d.nq_minus(), 0) + max_beta(d) + std::abs(d.gamma_power()) +
         sum_abs_alpha(d) + 2;
}

int default_n_max(const Density& d) {
  int nq = d.mode() == Mode::Line ? d.nq() : std::max(d.nq_plus(), 0) + std::max(-d.nq_minus(), 0);
  int sum_beta = 0;
  for (const auto& pp : d.exp_principal()) sum_beta += pp.order();
  const int np = static_cast<int>(d.poly_factors().size());
  return std::min(2048, 4 * (nq + sum_beta + np + std::abs(d.gamma_power()) + 4));
}

SdeSystem build_system(const Density& d, int n_max) {
  if (n_max < 0) throw InputError("n_max must be non-negative");
  auto p = convert_params<cplx>(d, [](cplx z) { return std::optional<cplx>(z); });
  return assemble(*p, n_max, steady_threshold(d));
}

std::optional<ExactSdeSystem> build_exact_system(const Density& d, int n_max) {
  if (n_max < 0) throw InputError("n_max must be non-negative");
  auto p = convert_params<GaussRational>(d, [](cplx z) { return gauss_rational(z); });
  if (!p) return std::nullopt;
  return assemble(*p, n_max, steady_threshold(d));
}

std::vector<std::vector<cplx>> dense_rows(const SdeSystem& sys) {
  std::vector<std::vector<cplx>> out(sys.rows.size(), std::vector<cplx>(sys.variables.size()));
  for (std::size_t i = 0; i < sys.rows.size(); ++i)
    for (const auto& [j, v] : sys.rows[i]) out[i][j] = v;
  return out;
}

CorankResult corank(const SdeSystem& sys, double tol_rank) {
  CorankResult res;
  const auto nslots = static_cast<Eigen::Index>(sys.variables.size());
  const auto ncols = nslots + sys.n_aux;
  if (ncols == 0) return res;

  // Rows are taken in recursion order; each is max-normalized, reduced
  // against the accepted pivot rows and accepted when what remains exceeds
  // tol_rank.
  std::vector<Eigen::VectorXcd> pivot_rows;
  std::vector<Eigen::Index> pivot_cols;
  for (const auto& row : sys.chain_rows) {
    Eigen::VectorXcd r = Eigen::VectorXcd::Zero(ncols);
    for (const auto& [j, v] : row) r(j) = v;
    const double m = r.cwiseAbs().maxCoeff();
    if (m == 0) continue;
    r *= 1.0 / m;
    for (std::size_t k = 0; k < pivot_rows.size(); ++k) {
      const cplx f = r(pivot_cols[k]);
      if (f != 0.0) r -= f * pivot_rows[k];
    }
    Eigen::Index j = 0;
    const double p = r.cwiseAbs().maxCoeff(&j);
    res.pivots.push_back(p);
    if (p <= tol_rank) continue;
    r /= r(j);
    r(j) = 1.0;
    pivot_rows.push_back(std::move(r));
    pivot_cols.push_back(j);
  }
  res.n_sde = static_cast<int>(ncols) - static_cast<int>(pivot_rows.size());

  // One null vector per free column, by back substitution.
  std::vector<bool> is_pivot(static_cast<std::size_t>(ncols), false);
  for (auto j : pivot_cols) is_pivot[static_cast<std::size_t>(j)] = true;
  for (Eigen::Index f = 0; f < ncols; ++f) {
    if (is_pivot[static_cast<std::size_t>(f)]) continue;
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(ncols);
    x(f) = 1.0;
    for (std::size_t k = pivot_rows.size(); k-- > 0;) {
      const Eigen::Index pc = pivot_cols[k];
      x(pc) = 0.0;
      x(pc) = -(pivot_rows[k].transpose() * x)(0);
    }
    Eigen::VectorXcd y = x.head(nslots);
    const double norm = y.norm();
    if (norm > 0 && std::isfinite(norm)) y *= 1.0 / norm;
    MomentVector mv;
    for (Eigen::Index j = 0; j < nslots; ++j) mv.set(sys.variables[static_cast<std::size_t>(j)], y(j));
    res.basis.push_back(std::move(mv));
  }
  return res;
}

int exact_corank(const ExactSdeSystem& sys) {
  const std::size_t ncols = sys.variables.size();
  std::vector<std::vector<GaussRational>> A(sys.rows.size(), std::vector<GaussRational>(ncols));
  for (std::size_t i = 0; i < sys.rows.size(); ++i)
    for (const auto& [j, v] : sys.rows[i]) A[i][static_cast<std::size_t>(j)] = v;

  std::size_t rank = 0;
  for (std::size_t c = 0; c < ncols && rank < A.size(); ++c) {
    std::size_t piv = rank;
    while (piv < A.size() && A[piv][c].is_zero()) ++piv;
    if (piv == A.size()) continue;
    std::swap(A[piv], A[rank]);
    const GaussRational inv = GaussRational(1) / A[rank][c];
    for (std::size_t j = c; j < ncols; ++j) A[rank][j] *= inv;
    for (std::size_t i = rank + 1; i < A.size(); ++i) {
      if (A[i][c].is_zero()) continue;
      const GaussRational f = A[i][c];
      for (std::size_t j = c; j < ncols; ++j)
        if (!A[rank][j].is_zero()) A[i][j] -= f * A[rank][j];
    }
    ++rank;
  }
  return static_cast<int>(ncols - rank);
}

DimensionReport dimension_check(const Density& d, std::vector<int> n_max_list, double tol_rank) {
  if (n_max_list.empty()) n_max_list.push_back(default_n_max(d));
  std::sort(n_max_list.begin(), n_max_list.end());
  if (n_max_list.size() == 1) n_max_list.push_back(2 * n_max_list.front());

  DimensionReport rep;
  rep.n_gamma = census(d).n_gamma;
  for (int n : n_max_list) {
    const auto sys = build_system(d, n);
    auto cr = corank(sys, tol_rank);
    rep.n_max.push_back(n);
    rep.n_sde.push_back(cr.n_sde);
    rep.steady.push_back(sys.steady);
    rep.final = std::move(cr);
  }
  const std::size_t k = rep.n_max.size();
  rep.stabilized = rep.steady[k - 2] && rep.steady[k - 1] && rep.n_sde[k - 2] == rep.n_sde[k - 1];
  rep.pass = rep.stabilized && rep.n_sde.back() == rep.n_gamma;
  // Rational elimination cost grows quickly with the window, so the oracle
  // runs at the smallest steady n_max.
  for (std::size_t i = 0; i < k; ++i) {
    if (!rep.steady[i]) continue;
    if (auto ex = build_exact_system(d, rep.n_max[i])) {
      rep.exact_n_sde = exact_corank(*ex);
      rep.exact_n_max = rep.n_max[i];
    }
    break;
  }
  if (!rep.stabilized) {
    std::ostringstream os;
    os << "corank not stabilized: ";
    for (std::size_t i = 0; i < k; ++i)
      os << "n_max=" << rep.n_max[i] << " -> " << rep.n_sde[i] << (rep.steady[i] ? "" : " (window too small)")
         << (i + 1 < k ? ", " : "");
    throw NotStabilized(os.str());
  }
  return rep;
}

cplx slot_weight(const Density& d, const Slot& s, cplx z) {
  const cplx w = d.variable(z);
  switch (s.kind) {
    case Slot::Kind::E:
      return d.mode() == Mode::Line ? ipow(z, s.index) : std::exp(cplx(0, s.index) * z);
    case Slot::Kind::F:
      return 1.0 / (w - d.poly_factors()[static_cast<std::size_t>(s.index)].a);
    case Slot::Kind::G:
      return ipow(1.0 / (w - d.exp_principal()[static_cast<std::size_t>(s.index)].b), s.power);
  }
  return 0.0;
}

namespace {

// log w of a slot weight, on any branch.
cplx slot_log_weight(const Density& d, const Slot& s, cplx z) {
  switch (s.kind) {
    case Slot::Kind::E:
      if (s.index == 0) return 0.0;
      return d.mode() == Mode::Line ? static_cast<double>(s.index) * std::log(z) : cplx(0, s.index) * z;
    case Slot::Kind::F:
      return -std::log(d.variable(z) - d.poly_factors()[static_cast<std::size_t>(s.index)].a);
    case Slot::Kind::G:
      return -static_cast<double>(s.power) * std::log(d.variable(z) - d.exp_principal()[static_cast<std::size_t>(s.index)].b);
  }
  return 0.0;
}

// max log |rho w| over the path nodes and points along the polyline. Moments
// span many orders of magnitude; dividing by this keeps the absolute
// quadrature and tail tolerances meaningful.
double log_integrand_scale(const Density& d, const PathSpec& p, const std::function<cplx(cplx)>& lw) {
  auto nodes = path_nodes(p);
  if (p.kind == PathSpec::Kind::Closed && !nodes.empty()) nodes.push_back(nodes.front());
  std::vector<cplx> samples = nodes;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    for (int k = 1; k < 16; ++k) samples.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * (k / 16.0));
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : samples) {
    try {
      const double m = (d.log_value(z) + lw(z)).real();
      if (std::isfinite(m)) best = std::max(best, m);
    } catch (const Error&) {
    }
  }
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace

MomentVector moments_of_functional(const Density& d, const PathSpec& p, int n_max, const QuadratureConfig& cfg) {
  const auto sys = build_system(d, n_max);
  MomentVector mv;
  for (const auto& s : sys.variables) {
    const std::function<cplx(cplx)> lw = [&](cplx z) { return slot_log_weight(d, s, z); };
    const double log_scale = log_integrand_scale(d, p, lw);
    const auto r = integrate_log_weight(d, p, [&](cplx z) { return lw(z) - log_scale; }, cfg);
    const double scale = std::exp(log_scale);
    mv.set(s, r.value * scale);
    mv.scale[s] = r.l1 * scale;
  }
  return mv;
}

std::vector<double> residuals(const SdeSystem& sys, const MomentVector& m) {
  std::vector<double> out;
  out.reserve(sys.rows.size());
  for (const auto& row : sys.rows) {
    cplx sum(0.0);
    double denom = 0.0;
    for (const auto& [j, c] : row) {
      const Slot& s = sys.variables[static_cast<std::size_t>(j)];
      const auto v = m.get(s);
      if (!v) throw InputError("moment vector lacks slot " + s.name());
      sum += c * *v;
      double mag = std::abs(*v);
      if (auto it = m.scale.find(s); it != m.scale.end()) mag = std::max(mag, it->second);
      denom += std::abs(c) * mag;
    }
    out.push_back(denom > 0 ? std::abs(sum) / denom : 0.0);
  }
  return out;
}

int moment_rank(const SdeSystem& sys, const std::vector<MomentVector>& moments, double tol) {
  if (moments.empty() || sys.variables.empty()) return 0;
  Eigen::MatrixXcd M(static_cast<Eigen::Index>(moments.size()), static_cast<Eigen::Index>(sys.variables.size()));
  for (std::size_t i = 0; i < moments.size(); ++i)
    for (std::size_t j = 0; j < sys.variables.size(); ++j) {
      const auto v = moments[i].get(sys.variables[j]);
      if (!v) throw InputError("moment vector lacks slot " + sys.variables[j].name());
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v;
    }
  normalize_dense(M);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  const Eigen::VectorXd s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++rank;
  return rank;
}

double in_span_residual(const SdeSystem& sys, std::size_t row) {
  if (row >= sys.rows.size()) throw InputError("row index out of range");
  Eigen::MatrixXcd A = to_dense(sys.rows, sys.variables.size());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double m = A.row(i).cwiseAbs().maxCoeff();
    if (m > 0) A.row(i) *= 1.0 / m;
  }
  const Eigen::VectorXcd target = A.row(static_cast<Eigen::Index>(row)).transpose();
  const double tn = target.norm();
  if (tn == 0) return 0.0;
  if (row == 0) return 1.0;
  const Eigen::MatrixXcd B = A.topRows(static_cast<Eigen::Index>(row)).transpose();
  const Eigen::VectorXcd coef = B.completeOrthogonalDecomposition().solve(target);
  return (B * coef - target).norm() / tn;
}

}  // namespace clpaths
