#include "clpaths/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "clpaths/errors.hpp"
#include "clpaths/numeric.hpp"

namespace clpaths {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(cplx z) {
  std::ostringstream os;
  os << "(" << z.real() << "," << z.imag() << ")";
  return os.str();
}

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

}  // namespace

Density::Density(Mode mode, int gamma_power, std::vector<PolyFactor> poly_factors,
                 std::map<int, cplx> exp_poly, std::vector<PrincipalPart> exp_principal)
    : mode_(mode),
      gamma_(gamma_power),
      poly_(std::move(poly_factors)),
      principal_(std::move(exp_principal)) {
  // Zero coefficients do not change rho; drop them so leading terms are nonzero.
  for (const auto& [k, c] : exp_poly)
    if (c != cplx(0.0)) exp_poly_.emplace(k, c);
  for (auto& p : principal_)
    while (!p.d.empty() && p.d.back() == cplx(0.0)) p.d.pop_back();
  validate();
}

void Density::validate() const {
  if (mode_ == Mode::Line && gamma_ != 0)
    throw InvalidDensity("gamma must be 0 in line mode");
  for (std::size_t i = 0; i < poly_.size(); ++i) {
    if (poly_[i].alpha == 0) throw InvalidDensity("poly factor exponent alpha must be nonzero");
    if (!std::isfinite(poly_[i].a.real()) || !std::isfinite(poly_[i].a.imag()))
      throw InvalidDensity("poly factor location must be finite");
    if (mode_ == Mode::Cylinder && poly_[i].a == cplx(0.0))
      throw InvalidDensity("cylinder mode: poly factor location a must be nonzero (use gamma)");
    for (std::size_t j = 0; j < i; ++j)
      if (poly_[i].a == poly_[j].a)
        throw InvalidDensity("poly factor locations must be pairwise distinct: " + fmt(poly_[i].a));
  }
  for (std::size_t i = 0; i < principal_.size(); ++i) {
    if (principal_[i].d.empty())
      throw InvalidDensity("principal part at " + fmt(principal_[i].b) + " has no nonzero coefficient");
    if (mode_ == Mode::Cylinder && principal_[i].b == cplx(0.0))
      throw InvalidDensity("cylinder mode: principal part location b must be nonzero");
    for (std::size_t j = 0; j < i; ++j)
      if (principal_[i].b == principal_[j].b)
        throw InvalidDensity("principal part locations must be pairwise distinct: " + fmt(principal_[i].b));
  }
  if (mode_ == Mode::Line)
    for (const auto& [k, c] : exp_poly_)
      if (k < 0) throw InvalidDensity("line mode: exp_poly keys must be nonnegative");
}

int Density::nq() const {
  int n = 0;
  for (const auto& [k, c] : exp_poly_) n = std::max(n, k);
  return n;
}

int Density::nq_minus() const { return exp_poly_.empty() ? 0 : exp_poly_.begin()->first; }
int Density::nq_plus() const { return exp_poly_.empty() ? 0 : exp_poly_.rbegin()->first; }

std::optional<std::size_t> Density::coinciding_principal(std::size_t l) const {
  for (std::size_t m = 0; m < principal_.size(); ++m)
    if (principal_[m].b == poly_[l].a) return m;
  return std::nullopt;
}

cplx Density::variable(cplx z) const {
  return mode_ == Mode::Line ? z : std::exp(cplx(0.0, 1.0) * z);
}

cplx Density::log_value(cplx z) const {
  const cplx w = variable(z);
  const double g = guard(w);
  cplx acc = mode_ == Mode::Cylinder ? cplx(0.0, 1.0) * static_cast<double>(gamma_) * z : cplx(0.0);
  for (const auto& f : poly_) {
    const cplx q = w - f.a;
    if (std::abs(q) < g) {
      if (f.alpha > 0) return {-std::numeric_limits<double>::infinity(), 0.0};
      throw SingularityTooClose("evaluation at pole " + fmt(f.a));
    }
    acc += static_cast<double>(f.alpha) * std::log(q);
  }
  for (const auto& [k, c] : exp_poly_) acc += c * ipow(w, k);
  for (const auto& p : principal_) {
    const cplx q = w - p.b;
    if (std::abs(q) < g) throw SingularityTooClose("evaluation at essential singularity " + fmt(p.b));
    const cplx inv = 1.0 / q;
    cplx pw = inv;
    for (const auto& dr : p.d) {
      acc += dr * pw;
      pw *= inv;
    }
  }
  return acc;
}

cplx evaluate(const Density& d, cplx z) {
  const cplx w = d.variable(z);
  const double g = Density::guard(w);
  cplx expo(0.0);
  for (const auto& [k, c] : d.exp_poly()) expo += c * ipow(w, k);
  for (const auto& p : d.exp_principal()) {
    const cplx q = w - p.b;
    if (std::abs(q) < g) throw SingularityTooClose("evaluation at essential singularity " + fmt(p.b));
    const cplx inv = 1.0 / q;
    cplx pw = inv;
    for (const auto& dr : p.d) {
      expo += dr * pw;
      pw *= inv;
    }
  }
  cplx prod = d.mode() == Mode::Cylinder
                  ? std::exp(cplx(0.0, 1.0) * static_cast<double>(d.gamma_power()) * z)
                  : cplx(1.0);
  for (const auto& f : d.poly_factors()) {
    const cplx q = w - f.a;
    if (std::abs(q) < g) {
      if (f.alpha > 0) return 0.0;
      throw SingularityTooClose("evaluation at pole " + fmt(f.a));
    }
  }
  if (std::abs(expo.real()) <= Density::kLogSpaceThreshold) {
    for (const auto& f : d.poly_factors()) prod *= ipow(w - f.a, f.alpha);
    if (std::isfinite(prod.real()) && std::isfinite(prod.imag())) return prod * std::exp(expo);
  }
  const cplx lv = d.log_value(z);
  if (lv.real() > std::log(std::numeric_limits<double>::max())) {
    std::ostringstream os;
    os << "rho overflows at z=" << fmt(z) << ", log|rho| = " << lv.real();
    throw Overflow(os.str(), lv.real());
  }
  return std::exp(lv);
}

namespace {

// Line: d/dz log rho. Cylinder: w d/dw log rho (the caller multiplies by i).
// Factor `skip` is left out.
cplx log_derivative(const Density& d, cplx w, std::size_t skip) {
  const double g = Density::guard(w);
  const bool cyl = d.mode() == Mode::Cylinder;
  cplx acc = cyl ? cplx(static_cast<double>(d.gamma_power())) : cplx(0.0);
  for (std::size_t l = 0; l < d.poly_factors().size(); ++l) {
    if (l == skip) continue;
    const auto& f = d.poly_factors()[l];
    const cplx q = w - f.a;
    if (std::abs(q) < g) throw SingularityTooClose("drift at factor location " + fmt(f.a));
    acc += static_cast<double>(f.alpha) * (cyl ? w / q : 1.0 / q);
  }
  for (const auto& [k, c] : d.exp_poly()) {
    if (k == 0) continue;
    acc += static_cast<double>(k) * c * ipow(w, cyl ? k : k - 1);
  }
  for (const auto& p : d.exp_principal()) {
    const cplx q = w - p.b;
    if (std::abs(q) < g) throw SingularityTooClose("drift at essential singularity " + fmt(p.b));
    const cplx inv = 1.0 / q;
    cplx pw = inv * inv;
    cplx s(0.0);
    for (std::size_t r = 1; r <= p.d.size(); ++r) {
      s += static_cast<double>(r) * p.d[r - 1] * pw;
      pw *= inv;
    }
    acc -= cyl ? w * s : s;
  }
  return acc;
}

}  // namespace

cplx drift(const Density& d, cplx z) {
  const cplx acc = log_derivative(d, d.variable(z), std::numeric_limits<std::size_t>::max());
  return d.mode() == Mode::Cylinder ? cplx(0.0, 1.0) * acc : acc;
}

cplx offset_drift(const Density& d, std::size_t l, cplx u) {
  const auto& f = d.poly_factors().at(l);
  const double alpha = static_cast<double>(f.alpha);
  if (d.mode() == Mode::Line) return alpha + u * log_derivative(d, f.a + u, l);
  // u i w / (w - a) with w = a e^{iu} equals i u / (1 - e^{-iu}).
  const cplx i(0.0, 1.0);
  const cplx u2 = u * u;
  const cplx pole = std::abs(u) < 1e-2 ? 1.0 + 0.5 * i * u - u2 / 12.0 - u2 * u2 / 720.0
                                       : i * u / (1.0 - std::exp(-i * u));
  return alpha * pole + i * u * log_derivative(d, d.variable(to_z_plane(d, f.a) + u), l);
}

cplx to_z_plane(const Density& d, cplx w) {
  if (d.mode() == Mode::Line) return w;
  return {wrap_angle(std::arg(w)), -std::log(std::abs(w))};
}

namespace {

// Minimum distance from p to any other feature, including periodic images on
// the cylinder.
double clearance(const std::vector<cplx>& features, cplx p, bool periodic) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : features) {
    for (int s = periodic ? -1 : 0; s <= (periodic ? 1 : 0); ++s) {
      const double dist = std::abs(f + kTwoPi * s - p);
      if (dist > 1e-14) best = std::min(best, dist);
    }
  }
  return best;
}

}  // namespace

SingularityCensus census(const Density& d) {
  SingularityCensus c;
  c.mode = d.mode();
  const bool cyl = d.mode() == Mode::Cylinder;
  const auto& poly = d.poly_factors();
  const auto& pp = d.exp_principal();

  std::vector<cplx> features;
  for (std::size_t l = 0; l < poly.size(); ++l) {
    const cplx loc = to_z_plane(d, poly[l].a);
    features.push_back(loc);
    if (d.coinciding_principal(l)) continue;
    ++c.n_p_prime;
    if (poly[l].alpha > 0)
      c.finite_zeroes.push_back({loc, poly[l].alpha});
    else
      c.poles.push_back({loc, -poly[l].alpha});
  }
  for (const auto& p : pp) {
    c.essential_singularities.push_back(to_z_plane(d, p.b));
    features.push_back(c.essential_singularities.back());
  }

  for (const auto& z : c.finite_zeroes) c.generalized_zero_approaches.push_back(FiniteZero{z.location});

  for (std::size_t m = 0; m < pp.size(); ++m) {
    const int beta = pp[m].order();
    cplx lead = pp[m].d.back();
    // Local z-plane coefficient: omega - b ~ i b (z - z_b).
    if (cyl) lead /= ipow(cplx(0.0, 1.0) * pp[m].b, beta);
    const cplx zb = c.essential_singularities[m];
    const double radius = std::min(0.5, 0.4 * clearance(features, zb, cyl));
    for (int j = 0; j < beta; ++j) {
      const double angle = (std::arg(lead) - std::numbers::pi + kTwoPi * j) / beta;
      c.generalized_zero_approaches.push_back(EssentialApproach{zb, j, angle, radius});
    }
  }

  int n_inf = 0;
  if (!cyl) {
    const int n = d.nq();
    if (n > 0) {
      const cplx lead = d.exp_poly().at(n);
      for (int j = 0; j < n; ++j)
        c.generalized_zero_approaches.push_back(
            InfinityRay{std::remainder((std::numbers::pi - std::arg(lead) + kTwoPi * j) / n, kTwoPi)});
      n_inf = n;
    }
  } else {
    const int np = d.nq_plus();
    if (np > 0) {
      const cplx lead = d.exp_poly().at(np);
      for (int j = 0; j < np; ++j)
        c.generalized_zero_approaches.push_back(
            ImaginaryInfinity{-1, wrap_angle((std::numbers::pi - std::arg(lead) + kTwoPi * j) / np)});
      n_inf += np;
    }
    const int nm = d.nq_minus();
    if (nm < 0) {
      const cplx lead = d.exp_poly().at(nm);
      for (int j = 0; j < -nm; ++j)
        c.generalized_zero_approaches.push_back(
            ImaginaryInfinity{+1, wrap_angle((std::numbers::pi - std::arg(lead) + kTwoPi * j) / nm)});
      n_inf += -nm;
    }
  }

  int sum_beta = 0;
  for (const auto& p : pp) sum_beta += p.order();
  const int n_finite_zero_factors = static_cast<int>(c.finite_zeroes.size());
  c.n_zero_approaches = n_finite_zero_factors + sum_beta + n_inf;
  c.has_zeroes = c.n_zero_approaches > 0;
  c.n_closed = static_cast<int>(c.poles.size() + pp.size()) + (cyl ? 1 : 0);
  c.n_gamma = c.n_closed + (c.has_zeroes ? c.n_zero_approaches - 1 : 0);
  c.n_g = c.n_p_prime + (cyl ? 0 : d.nq()) + sum_beta + static_cast<int>(pp.size());
  return c;
}

int closed_form_n_gamma(const Density& d) {
  int n_p_prime = 0;
  int n_pos_prime = 0;
  for (std::size_t l = 0; l < d.poly_factors().size(); ++l) {
    if (d.coinciding_principal(l)) continue;
    ++n_p_prime;
    if (d.poly_factors()[l].alpha > 0) ++n_pos_prime;
  }
  int sum_beta_plus_one = 0;
  int sum_beta = 0;
  for (const auto& p : d.exp_principal()) {
    sum_beta_plus_one += p.order() + 1;
    sum_beta += p.order();
  }
  if (d.mode() == Mode::Line) {
    const int n_g = n_p_prime + d.nq() + sum_beta_plus_one;
    const bool no_zeroes = d.nq() == 0 && d.exp_principal().empty() &&
                           std::all_of(d.poly_factors().begin(), d.poly_factors().end(),
                                       [](const PolyFactor& f) { return f.alpha < 0; });
    return no_zeroes ? n_g : n_g - 1;
  }
  const int np = std::max(d.nq_plus(), 0);
  const int nm = std::max(-d.nq_minus(), 0);
  const int n_z = sum_beta + n_pos_prime + np + nm;
  return np + nm + n_p_prime + sum_beta_plus_one + 1 - (n_z > 0 ? 1 : 0);
}

}  // namespace clpaths
