#include "clpaths/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include "clpaths/errors.hpp"
#include "clpaths/numeric.hpp"
#include "clpaths/quadrature.hpp"

namespace clpaths {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const cplx kI(0.0, 1.0);
const double kMaxLog = std::log(std::numeric_limits<double>::max());

std::string fmt(cplx z) {
  std::ostringstream os;
  os.precision(4);
  os << "(" << z.real() << "," << z.imag() << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Observable

Observable Observable::monomial(int m) {
  if (m < 0) throw InputError("monomial power must be nonnegative");
  return {Kind::Monomial, m, false};
}
Observable Observable::exponential(int k) { return {Kind::Exponential, k, false}; }
Observable Observable::drift() { return {Kind::Drift, 0, false}; }

Observable Observable::sd_image() const {
  if (kind_ == Kind::Drift || sd_image_) throw InputError("sd_image is only defined for x^m and exp(ikx)");
  return {kind_, index_, true};
}

cplx Observable::base_value(cplx z) const {
  if (kind_ == Kind::Monomial) return ipow(z, index_);
  return std::exp(kI * static_cast<double>(index_) * z);
}

cplx Observable::derivative(cplx z) const {
  if (kind_ == Kind::Monomial) return index_ == 0 ? cplx(0.0) : static_cast<double>(index_) * ipow(z, index_ - 1);
  if (kind_ == Kind::Exponential) return kI * static_cast<double>(index_) * std::exp(kI * static_cast<double>(index_) * z);
  throw InputError("derivative of the drift observable is not provided");
}

cplx Observable::operator()(const Density& d, cplx z) const {
  if (kind_ == Kind::Drift || sd_image_) return with_drift(z, clpaths::drift(d, z));
  return base_value(z);
}

cplx Observable::with_drift(cplx z, cplx v) const {
  if (kind_ == Kind::Drift) return v;
  if (sd_image_) return derivative(z) + v * base_value(z);
  return base_value(z);
}

bool Observable::admitted(Mode mode) const {
  if (mode == Mode::Line) return true;
  return kind_ != Kind::Monomial;
}

std::string Observable::label() const {
  std::string base;
  switch (kind_) {
    case Kind::Drift:
      return "v";
    case Kind::Monomial:
      base = index_ == 0 ? "1" : index_ == 1 ? "x" : "x^" + std::to_string(index_);
      break;
    case Kind::Exponential:
      if (index_ == 1)
        base = "exp(ix)";
      else if (index_ == -1)
        base = "exp(-ix)";
      else
        base = "exp(" + std::to_string(index_) + "ix)";
      break;
  }
  return sd_image_ ? "A[" + base + "]" : base;
}

Observable Observable::parse(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s == "v") return drift();
  if (s.size() > 3 && s.rfind("A[", 0) == 0 && s.back() == ']') return parse(s.substr(2, s.size() - 3)).sd_image();
  if (s == "1") return monomial(0);
  if (s == "x" || s == "z") return monomial(1);
  static const std::regex mono(R"([xz]\^(\d+))");
  static const std::regex expo(R"(exp\((-?\d*)i[xz]\))");
  std::smatch m;
  if (std::regex_match(s, m, mono)) return monomial(std::stoi(m[1]));
  if (std::regex_match(s, m, expo)) {
    const std::string k = m[1];
    if (k.empty()) return exponential(1);
    if (k == "-") return exponential(-1);
    return exponential(std::stoi(k));
  }
  throw InputError("unrecognized observable '" + raw + "' (expected 1, x, x^m, exp(kix), v, A[...])");
}

// ---------------------------------------------------------------------------
// PathSpec

PathSpec PathSpec::open(Endpoint start, Endpoint end, std::vector<cplx> waypoints, std::string label) {
  PathSpec p;
  p.kind = Kind::Open;
  p.start = std::move(start);
  p.end = std::move(end);
  p.waypoints = std::move(waypoints);
  p.label = std::move(label);
  return p;
}

PathSpec PathSpec::closed(std::vector<cplx> waypoints, int winding, std::vector<std::string> enclosed,
                          std::string label) {
  PathSpec p;
  p.kind = Kind::Closed;
  p.waypoints = std::move(waypoints);
  p.winding = winding;
  p.enclosed = std::move(enclosed);
  p.label = std::move(label);
  return p;
}

// ---------------------------------------------------------------------------
// Path geometry

namespace {

struct Piece {
  enum class Type { Segment, Ray, Radial };
  Type type = Type::Segment;
  cplx p;            // Segment start, Ray anchor, Radial singular point b
  cplx q;            // Segment end, Ray/Radial unit direction
  double radius = 0; // Radial: anchor at p + radius * q
  double sign = 1;   // Ray: +1 outward. Radial: +1 for anchor -> b.
};

cplx essential_anchor(const EssentialApproach& e) { return e.b + e.radius * std::polar(1.0, e.angle); }

double nearest_shift(double x, double target) { return x + kTwoPi * std::round((target - x) / kTwoPi); }

std::vector<Piece> pieces_of(const PathSpec& path, std::vector<cplx>* nodes_out = nullptr) {
  std::vector<Piece> pieces;
  std::vector<cplx> core = path.waypoints;
  if (path.kind == PathSpec::Kind::Closed) {
    if (core.empty()) throw InputError("closed path '" + path.label + "' has no waypoints");
    for (std::size_t i = 0; i < core.size(); ++i) {
      const cplx a = core[i];
      const cplx b = i + 1 < core.size() ? core[i + 1] : core.front() + kTwoPi * path.winding;
      if (a != b) pieces.push_back({Piece::Type::Segment, a, b});
    }
    if (nodes_out) *nodes_out = core;
    return pieces;
  }
  if (!path.start || !path.end) throw InputError("open path '" + path.label + "' needs start and end");
  const Endpoint& s = *path.start;
  const Endpoint& e = *path.end;

  if (core.empty()) {
    auto seed = [](const Endpoint& ep) -> std::optional<cplx> {
      if (auto z = std::get_if<FiniteZero>(&ep)) return z->z;
      if (auto ea = std::get_if<EssentialApproach>(&ep)) return essential_anchor(*ea);
      return std::nullopt;
    };
    if (auto z = seed(s))
      core.push_back(*z);
    else if (auto z2 = seed(e))
      core.push_back(*z2);
    else if (auto im = std::get_if<ImaginaryInfinity>(&s))
      core.push_back(cplx(im->x, 0.0));
    else
      core.push_back(0.0);
  }

  std::vector<Piece> head, tail;
  // Start side.
  if (auto z = std::get_if<FiniteZero>(&s)) {
    if (core.front() != z->z) core.insert(core.begin(), z->z);
  } else if (auto r = std::get_if<InfinityRay>(&s)) {
    head.push_back({Piece::Type::Ray, core.front(), std::polar(1.0, r->angle), 0.0, -1.0});
  } else if (auto im = std::get_if<ImaginaryInfinity>(&s)) {
    const cplx n0 = core.front();
    const cplx anchor(nearest_shift(im->x, n0.real()), n0.imag());
    if (anchor != n0) core.insert(core.begin(), anchor);
    head.push_back({Piece::Type::Ray, anchor, kI * static_cast<double>(im->sign), 0.0, -1.0});
  } else if (auto ea = std::get_if<EssentialApproach>(&s)) {
    const cplx anchor = essential_anchor(*ea);
    if (core.front() != anchor) core.insert(core.begin(), anchor);
    head.push_back({Piece::Type::Radial, ea->b, std::polar(1.0, ea->angle), ea->radius, -1.0});
  }
  // End side.
  if (auto z = std::get_if<FiniteZero>(&e)) {
    if (core.back() != z->z) core.push_back(z->z);
  } else if (auto r = std::get_if<InfinityRay>(&e)) {
    tail.push_back({Piece::Type::Ray, core.back(), std::polar(1.0, r->angle), 0.0, 1.0});
  } else if (auto im = std::get_if<ImaginaryInfinity>(&e)) {
    const cplx n0 = core.back();
    const cplx anchor(nearest_shift(im->x, n0.real()), n0.imag());
    if (anchor != n0) core.push_back(anchor);
    tail.push_back({Piece::Type::Ray, anchor, kI * static_cast<double>(im->sign), 0.0, 1.0});
  } else if (auto ea = std::get_if<EssentialApproach>(&e)) {
    const cplx anchor = essential_anchor(*ea);
    if (core.back() != anchor) core.push_back(anchor);
    tail.push_back({Piece::Type::Radial, ea->b, std::polar(1.0, ea->angle), ea->radius, 1.0});
  }

  pieces = head;
  for (std::size_t i = 0; i + 1 < core.size(); ++i)
    if (core[i] != core[i + 1]) pieces.push_back({Piece::Type::Segment, core[i], core[i + 1]});
  pieces.insert(pieces.end(), tail.begin(), tail.end());
  if (nodes_out) *nodes_out = core;
  return pieces;
}

double point_segment_distance(cplx s, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(s - a);
  double t = ((s - a) * std::conj(ab)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(a + t * ab - s);
}

double point_ray_distance(cplx s, cplx a, cplx u) {
  const double t = std::max(0.0, ((s - a) * std::conj(u)).real());
  return std::abs(a + t * u - s);
}

std::vector<cplx> singular_points(const Density& d) {
  std::vector<cplx> out;
  for (const auto& f : d.poly_factors())
    if (f.alpha < 0 || d.coinciding_principal(&f - d.poly_factors().data())) out.push_back(to_z_plane(d, f.a));
  for (const auto& p : d.exp_principal()) out.push_back(to_z_plane(d, p.b));
  return out;
}

void check_clearance(const Density& d, const std::vector<Piece>& pieces, const PathSpec& path, double eps) {
  const auto sing = singular_points(d);
  const bool cyl = d.mode() == Mode::Cylinder;
  for (const auto& pc : pieces) {
    if (pc.type == Piece::Type::Radial) continue;
    double lo = pc.p.real(), hi = pc.p.real();
    if (pc.type == Piece::Type::Segment) {
      lo = std::min(lo, pc.q.real());
      hi = std::max(hi, pc.q.real());
    }
    for (const auto& s0 : sing) {
      int kmin = 0, kmax = 0;
      if (cyl) {
        kmin = static_cast<int>(std::floor((lo - s0.real()) / kTwoPi)) - 1;
        kmax = static_cast<int>(std::ceil((hi - s0.real()) / kTwoPi)) + 1;
      }
      for (int k = kmin; k <= kmax; ++k) {
        const cplx s = s0 + kTwoPi * k;
        const double dist = pc.type == Piece::Type::Segment ? point_segment_distance(s, pc.p, pc.q)
                                                            : point_ray_distance(s, pc.p, pc.q);
        if (dist < eps)
          throw SingularityTooClose("path '" + path.label + "' passes within " + std::to_string(dist) +
                                    " of singularity " + fmt(s));
      }
    }
  }
}

}  // namespace

std::vector<cplx> path_nodes(const PathSpec& p) {
  std::vector<cplx> nodes;
  pieces_of(p, &nodes);
  return nodes;
}

// ---------------------------------------------------------------------------
// Integration

namespace {

// Integral of g along the path; g(z) is the full integrand rho(z) w(z).
IntegralResult integrate_integrand(const Density& d, const PathSpec& path, const std::function<cplx(cplx)>& g,
                                   const QuadratureConfig& cfg) {
  const auto pieces = pieces_of(path);
  check_clearance(d, pieces, path, cfg.eps_path);
  auto safe_abs = [&](cplx z) {
    try {
      const double m = std::abs(g(z));
      return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
    } catch (const Overflow&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const double piece_tol = cfg.tol / std::max<std::size_t>(pieces.size(), 1);
  cplx total(0.0);
  double err = 0.0;
  double l1 = 0.0;
  bool ok = true;

  for (const auto& pc : pieces) {
    QuadratureEstimate est;
    if (pc.type == Piece::Type::Segment) {
      const cplx dz = pc.q - pc.p;
      est = gauss_kronrod([&](double t) { return g(pc.p + t * dz) * dz; }, 0.0, 1.0, piece_tol, cfg.rel_tol,
                          cfg.max_intervals);
    } else if (pc.type == Piece::Type::Ray) {
      constexpr double h = 0.25;
      constexpr int kConfirm = 4;
      double length = -1.0;
      const int nmax = static_cast<int>(cfg.max_extent / h);
      for (int k = 1; k <= nmax && length < 0; ++k) {
        const double t = k * h;
        if (safe_abs(pc.p + t * pc.q) >= cfg.tail_eps) continue;
        bool stays = true;
        for (int j = 1; j <= kConfirm && stays; ++j) stays = safe_abs(pc.p + (t + j * h) * pc.q) < cfg.tail_eps;
        if (stays) length = t;
      }
      if (length < 0)
        throw NoDecay("path '" + path.label + "': integrand does not decay along the tail from " + fmt(pc.p) +
                      " within max_extent");
      // t = expm1(s) concentrates nodes near the anchor.
      est = gauss_kronrod(
          [&](double s) {
            const double t = std::expm1(s);
            return g(pc.p + t * pc.q) * pc.q * std::exp(s);
          },
          0.0, std::log1p(length), piece_tol, cfg.rel_tol, cfg.max_intervals);
      est.value *= pc.sign;
    } else {
      constexpr int kConfirm = 4;
      double s_min = -1.0;
      for (int k = 1; k <= 400 && s_min < 0; ++k) {
        const double s = pc.radius * std::pow(0.92, k);
        if (safe_abs(pc.p + s * pc.q) >= cfg.tail_eps) continue;
        bool stays = true;
        for (int j = 1; j <= kConfirm && stays; ++j)
          stays = safe_abs(pc.p + pc.radius * std::pow(0.92, k + j) * pc.q) < cfg.tail_eps;
        if (stays) s_min = s;
      }
      if (s_min < 0)
        throw NoDecay("path '" + path.label + "': integrand does not vanish approaching essential singularity " +
                      fmt(pc.p));
      // s = e^sigma; the anchor -> b orientation contributes a minus sign.
      est = gauss_kronrod(
          [&](double sigma) {
            const double s = std::exp(sigma);
            return g(pc.p + s * pc.q) * pc.q * s;
          },
          std::log(s_min), std::log(pc.radius), piece_tol, cfg.rel_tol, cfg.max_intervals);
      est.value *= -pc.sign;
    }
    total += est.value;
    err += est.abs_err;
    l1 += est.l1;
    ok = ok && est.converged;
  }
  // Sum of the per-piece bounds.
  const double target = cfg.tol + std::max(cfg.rel_tol, 50.0 * 2.2e-16) * l1;
  if (!ok || err > target) {
    std::ostringstream os;
    os << "path '" << path.label << "': quadrature error estimate " << err << " exceeds tolerance " << target;
    throw QuadratureFail(os.str());
  }
  return {total, err, l1};
}

}  // namespace

IntegralResult integrate_weight(const Density& d, const PathSpec& path,
                                const std::function<cplx(cplx)>& weight, const QuadratureConfig& cfg) {
  return integrate_integrand(d, path, [&](cplx z) { return evaluate(d, z) * weight(z); }, cfg);
}

IntegralResult integrate_log_weight(const Density& d, const PathSpec& path,
                                    const std::function<cplx(cplx)>& log_weight, const QuadratureConfig& cfg) {
  return integrate_integrand(
      d, path,
      [&](cplx z) {
        const cplx l = d.log_value(z) + log_weight(z);
        if (l.real() > kMaxLog) throw Overflow("integrand exceeds the double range", l.real());
        return std::exp(l);
      },
      cfg);
}

IntegralResult integrate_detailed(const Density& d, const PathSpec& p, const Observable& f,
                                  const QuadratureConfig& cfg) {
  if (!f.admitted(d.mode()))
    throw InputError("observable " + f.label() + " is not admitted in cylinder mode");
  return integrate_weight(d, p, [&](cplx z) { return f(d, z); }, cfg);
}

cplx integrate(const Density& d, const PathSpec& p, const Observable& f, const QuadratureConfig& cfg) {
  return integrate_detailed(d, p, f, cfg).value;
}

bool FunctionalTable::all_ok() const {
  for (const auto& row : failures)
    for (const auto& cell : row)
      if (!cell.empty()) return false;
  return true;
}

FunctionalTable functional_table(const Density& d, const std::vector<PathSpec>& paths,
                                 const std::vector<Observable>& obs, const QuadratureConfig& cfg,
                                 bool normalize) {
  FunctionalTable t;
  t.observables = obs;
  const Observable one = d.mode() == Mode::Line ? Observable::monomial(0) : Observable::exponential(0);
  for (const auto& p : paths) {
    t.row_labels.push_back(p.label);
    std::vector<cplx> vals(obs.size());
    std::vector<double> errs(obs.size(), 0.0);
    std::vector<std::string> fails(obs.size());
    cplx norm(1.0);
    double norm_err = 0.0;
    std::string norm_fail;
    if (normalize) {
      try {
        const auto r = integrate_detailed(d, p, one, cfg);
        norm = r.value;
        norm_err = r.abs_err;
        if (norm == cplx(0.0)) norm_fail = "zero normalization";
      } catch (const Error& e) {
        norm_fail = std::string("normalization: ") + e.what();
      }
    }
    for (std::size_t j = 0; j < obs.size(); ++j) {
      if (!norm_fail.empty()) {
        fails[j] = norm_fail;
        continue;
      }
      try {
        const auto r = integrate_detailed(d, p, obs[j], cfg);
        vals[j] = r.value / norm;
        errs[j] = (r.abs_err + std::abs(vals[j]) * norm_err) / std::abs(norm);
      } catch (const Error& e) {
        fails[j] = e.what();
      }
    }
    t.values.push_back(std::move(vals));
    t.errors.push_back(std::move(errs));
    t.failures.push_back(std::move(fails));
    t.norms.push_back(norm);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Spanning paths

namespace {

class Router {
 public:
  explicit Router(const SingularityCensus& c) : periodic_(c.mode == Mode::Cylinder) {
    for (const auto& z : c.finite_zeroes) features_.push_back(z.location);
    for (const auto& p : c.poles) {
      features_.push_back(p.location);
      sing_.push_back(p.location);
    }
    for (const auto& b : c.essential_singularities) {
      features_.push_back(b);
      sing_.push_back(b);
    }
    double minpair = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < features_.size(); ++i) {
      for (std::size_t j = 0; j < features_.size(); ++j) {
        for (int k = periodic_ ? -1 : 0; k <= (periodic_ ? 1 : 0); ++k) {
          if (i == j && k == 0) continue;
          minpair = std::min(minpair, std::abs(features_[i] - features_[j] - kTwoPi * k));
        }
      }
    }
    clear_ = std::isfinite(minpair) ? std::min(1.0, 0.3 * minpair) : 1.0;
  }

  double clear() const { return clear_; }
  bool periodic() const { return periodic_; }
  const std::vector<cplx>& features() const { return features_; }
  const std::vector<cplx>& singular() const { return sing_; }

  // Distance from p to the nearest singular point (with periodic images).
  double sing_distance(cplx p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : images(sing_, p.real())) best = std::min(best, std::abs(s - p));
    return best;
  }

  // Insert detour nodes so no segment passes within clear() of a singular point.
  std::vector<cplx> route(std::vector<cplx> chain) const {
    int inserted = 0;
    for (std::size_t i = 0; i + 1 < chain.size() && inserted < 64;) {
      const cplx a = chain[i];
      const cplx b = chain[i + 1];
      std::optional<cplx> detour;
      for (const auto& s : images(sing_, 0.5 * (a.real() + b.real()))) {
        if (point_segment_distance(s, a, b) >= clear_) continue;
        const cplx ab = b - a;
        const double t = std::clamp(((s - a) * std::conj(ab)).real() / std::max(std::norm(ab), 1e-300), 0.0, 1.0);
        const cplx c = a + t * ab;
        cplx n = c - s;
        n = std::abs(n) > 1e-9 * clear_ ? n / std::abs(n) : kI * ab / std::abs(ab);
        detour = s + 1.5 * clear_ * n;
        break;
      }
      if (detour) {
        chain.insert(chain.begin() + static_cast<long>(i) + 1, *detour);
        ++inserted;
      } else {
        ++i;
      }
    }
    return chain;
  }

 private:
  std::vector<cplx> images(const std::vector<cplx>& pts, double around) const {
    if (!periodic_) return pts;
    std::vector<cplx> out;
    for (const auto& p : pts) {
      const double base = nearest_shift(p.real(), around) - p.real();
      for (int k = -2; k <= 2; ++k) out.push_back(p + base + kTwoPi * k);
    }
    return out;
  }

  bool periodic_;
  std::vector<cplx> features_;
  std::vector<cplx> sing_;
  double clear_ = 1.0;
};

std::vector<cplx> polygon(cplx center, double radius, int n = 16) {
  std::vector<cplx> pts;
  for (int k = 0; k < n; ++k) pts.push_back(center + std::polar(radius, kTwoPi * k / n));
  return pts;
}

// Height of the winding path: the candidate farthest from every feature,
// preferring small |y|.
double winding_height(const std::vector<cplx>& features) {
  if (features.empty()) return 0.0;
  std::vector<double> ys;
  for (const auto& f : features) ys.push_back(f.imag());
  std::sort(ys.begin(), ys.end());
  std::vector<double> cand = {0.0, ys.front() - 1.0, ys.back() + 1.0};
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) cand.push_back(0.5 * (ys[i] + ys[i + 1]));
  double best = cand.front();
  double best_score = -1.0;
  for (double y : cand) {
    double dmin = std::numeric_limits<double>::infinity();
    for (double fy : ys) dmin = std::min(dmin, std::abs(fy - y));
    const double score = std::min(dmin, 1.0) - 1e-3 * std::abs(y);
    if (score > best_score) {
      best_score = score;
      best = y;
    }
  }
  return best;
}

cplx choose_hub(const Router& r) {
  const auto& feats = r.features();
  if (r.periodic()) {
    const double y = winding_height(feats);
    cplx best(kPi, y);
    double best_d = -1.0;
    for (int k = 0; k < 16; ++k) {
      const cplx c(kTwoPi * (k + 0.5) / 16.0, y);
      const double dist = r.sing_distance(c);
      if (dist > best_d + 1e-12) {
        best_d = dist;
        best = c;
      }
    }
    return best;
  }
  cplx centroid(0.0);
  for (const auto& f : feats) centroid += f;
  if (!feats.empty()) centroid /= static_cast<double>(feats.size());
  std::vector<cplx> cand = {0.0, centroid};
  for (double rad : {0.5, 1.0, 2.0})
    for (int k = 0; k < 8; ++k) cand.push_back(centroid + std::polar(rad, kTwoPi * k / 8.0));
  for (const auto& c : cand)
    if (r.sing_distance(c) >= 2.0 * r.clear()) return c;
  cplx best = cand.front();
  for (const auto& c : cand)
    if (r.sing_distance(c) > r.sing_distance(best)) best = c;
  return best;
}

// Nodes that lead from an endpoint into the network; the first node is where
// the endpoint's own tail (if any) attaches.
std::vector<cplx> entry_nodes(const Endpoint& e, cplx hub, const Router& r, double y_lo, double y_hi,
                              double reach) {
  if (auto z = std::get_if<FiniteZero>(&e)) {
    cplx loc = z->z;
    if (r.periodic()) loc = {nearest_shift(loc.real(), hub.real()), loc.imag()};
    return {loc};
  }
  if (auto ray = std::get_if<InfinityRay>(&e)) return {hub + std::polar(reach, ray->angle)};
  if (auto im = std::get_if<ImaginaryInfinity>(&e))
    return {cplx(nearest_shift(im->x, hub.real()), im->sign < 0 ? y_lo : y_hi)};
  const auto& ea = std::get<EssentialApproach>(e);
  const cplx dir = std::polar(1.0, ea.angle);
  cplx b = ea.b;
  if (r.periodic()) b = {nearest_shift(b.real(), hub.real()), b.imag()};
  return {b + 2.0 * ea.radius * dir};
}

}  // namespace

std::vector<PathSpec> spanning_paths(const SingularityCensus& c) {
  std::vector<PathSpec> out;
  if (c.n_gamma == 0) return out;
  const Router router(c);
  const auto& approaches = c.generalized_zero_approaches;

  if (c.has_zeroes && approaches.size() > 1) {
    const bool finite_root = !c.finite_zeroes.empty();
    const std::size_t root_idx = finite_root ? 0 : approaches.size() - 1;
    const Endpoint& root = approaches[root_idx];
    const cplx hub = finite_root ? std::get<FiniteZero>(root).z : choose_hub(router);

    double y_lo = hub.imag(), y_hi = hub.imag();
    double reach = 1.0;
    for (const auto& f : router.features()) {
      y_lo = std::min(y_lo, f.imag());
      y_hi = std::max(y_hi, f.imag());
      reach = std::max(reach, std::abs(f - hub) + 1.0);
    }
    y_lo -= 1.0;
    y_hi += 1.0;

    const auto root_nodes = finite_root ? std::vector<cplx>{hub} : entry_nodes(root, hub, router, y_lo, y_hi, reach);
    for (std::size_t i = 0; i < approaches.size(); ++i) {
      if (i == root_idx) continue;
      const Endpoint& target = approaches[i];
      std::vector<cplx> chain = root_nodes;
      if (!finite_root) chain.push_back(hub);
      const auto tnodes = entry_nodes(target, hub, router, y_lo, y_hi, reach);
      chain.insert(chain.end(), tnodes.begin(), tnodes.end());
      chain = router.route(chain);
      // Drop finite endpoint locations; PathSpec adds them back.
      std::vector<cplx> way(chain.begin(), chain.end());
      if (finite_root && !way.empty()) way.erase(way.begin());
      if (std::holds_alternative<FiniteZero>(target) && !way.empty()) way.pop_back();
      // Essential endpoints: the tail anchor may be shifted on the cylinder.
      Endpoint root_ep = root;
      Endpoint target_ep = target;
      auto shift_ess = [&](Endpoint& ep) {
        if (auto ea = std::get_if<EssentialApproach>(&ep); ea && router.periodic())
          ea->b = {nearest_shift(ea->b.real(), hub.real()), ea->b.imag()};
        if (auto fz = std::get_if<FiniteZero>(&ep); fz && router.periodic())
          fz->z = {nearest_shift(fz->z.real(), hub.real()), fz->z.imag()};
      };
      shift_ess(root_ep);
      shift_ess(target_ep);
      out.push_back(PathSpec::open(root_ep, target_ep, std::move(way),
                                   "open:" + describe(root) + "->" + describe(target)));
    }
  }

  const double loop_r = router.clear();
  for (const auto& p : c.poles)
    out.push_back(PathSpec::closed(polygon(p.location, loop_r), 0, {"pole" + fmt(p.location)},
                                   "loop:pole" + fmt(p.location)));
  for (const auto& b : c.essential_singularities)
    out.push_back(PathSpec::closed(polygon(b, loop_r), 0, {"essential" + fmt(b)}, "loop:essential" + fmt(b)));
  if (c.mode == Mode::Cylinder) {
    const double y = winding_height(router.features());
    out.push_back(PathSpec::closed({cplx(0.0, y)}, 1, {}, "winding"));
  }
  return out;
}

}  // namespace clpaths
