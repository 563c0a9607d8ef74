#include "clpaths/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "clpaths/errors.hpp"

namespace clpaths {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// prediction = offset + design * theta for real parameters theta, on the real
// data points (Re/Im of each record).
struct LinearModel {
  std::vector<std::string> names;
  Eigen::VectorXd y, sigma, offset;
  Eigen::MatrixXd design;
};

struct LinearSolution {
  Eigen::VectorXd theta;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
};

LinearSolution solve(const LinearModel& m, const Eigen::VectorXd& y, double rank_tol) {
  const Eigen::VectorXd w = m.sigma.cwiseInverse();
  const Eigen::MatrixXd a = w.asDiagonal() * m.design;
  const Eigen::VectorXd rhs = w.asDiagonal() * (y - m.offset);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(s.size() - 1) > rank_tol * s(0)))
    throw RankDeficientBasis("fit: basis functionals are numerically dependent (singular value ratio " +
                             std::to_string(s.size() ? s(s.size() - 1) / s(0) : 0.0) + ")");
  LinearSolution out;
  out.theta = svd.solve(rhs);
  const Eigen::MatrixXd vs = svd.matrixV() * s.cwiseInverse().asDiagonal();
  out.covariance = vs * vs.transpose();
  out.chi2 = (a * out.theta - rhs).squaredNorm();
  return out;
}

struct Columns {
  std::vector<std::size_t> record;  // index into cl for every basis column used
  std::vector<std::size_t> column;
};

Columns match(const std::vector<ExpectationRecord>& cl, const FunctionalTable& basis) {
  Columns c;
  for (std::size_t j = 0; j < basis.observables.size(); ++j)
    for (std::size_t k = 0; k < cl.size(); ++k)
      if (cl[k].observable == basis.observables[j]) {
        c.record.push_back(k);
        c.column.push_back(j);
        break;
      }
  for (std::size_t i = 0; i < basis.values.size(); ++i)
    for (std::size_t j : c.column)
      if (!basis.ok(i, j))
        throw InputError("fit: basis cell (" + basis.row_labels[i] + ", " + basis.observables[j].label() +
                         ") failed: " + basis.failures[i][j]);
  return c;
}

// Appends the Re and Im data points of the matched records; `row(j)` gives the
// offset and design entries (complex, per parameter) of column j.
template <class Row>
LinearModel build_model(const std::vector<ExpectationRecord>& cl, const Columns& cols, std::size_t n_params,
                        Row&& row, std::vector<std::string>& skipped) {
  std::vector<double> y, sigma, offset;
  std::vector<std::vector<double>> design;
  std::vector<std::string> names;
  for (std::size_t n = 0; n < cols.column.size(); ++n) {
    const auto& rec = cl[cols.record[n]];
    const auto [off, coef] = row(cols.column[n]);
    for (int part = 0; part < 2; ++part) {
      const double err = part ? rec.err.imag() : rec.err.real();
      const std::string name = (part ? "Im " : "Re ") + rec.observable.label();
      if (!(err > 0)) {
        skipped.push_back(name);
        continue;
      }
      names.push_back(name);
      y.push_back(part ? rec.mean.imag() : rec.mean.real());
      sigma.push_back(err);
      offset.push_back(part ? off.imag() : off.real());
      std::vector<double> drow(n_params);
      for (std::size_t p = 0; p < n_params; ++p) drow[p] = part ? coef[p].imag() : coef[p].real();
      design.push_back(std::move(drow));
    }
  }
  LinearModel m;
  m.names = std::move(names);
  const auto n = static_cast<Eigen::Index>(y.size());
  m.y = Eigen::Map<Eigen::VectorXd>(y.data(), n);
  m.sigma = Eigen::Map<Eigen::VectorXd>(sigma.data(), n);
  m.offset = Eigen::Map<Eigen::VectorXd>(offset.data(), n);
  m.design.resize(n, static_cast<Eigen::Index>(n_params));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t p = 0; p < n_params; ++p)
      m.design(i, static_cast<Eigen::Index>(p)) = design[static_cast<std::size_t>(i)][p];
  if (m.y.size() <= static_cast<Eigen::Index>(n_params))
    throw InputError("fit: " + std::to_string(m.y.size()) + " data points for " + std::to_string(n_params) +
                     " free parameters");
  return m;
}

std::vector<Eigen::VectorXd> bootstrap(const LinearModel& m, const FitConfig& cfg) {
  std::vector<Eigen::VectorXd> out;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int b = 0; b < cfg.bootstrap; ++b) {
    Eigen::VectorXd y = m.y;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += m.sigma(i) * normal(rng);
    out.push_back(solve(m, y, cfg.rank_tol).theta);
  }
  return out;
}

double spread(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace

FitResult fit(const std::vector<ExpectationRecord>& cl, const FunctionalTable& basis, const FitConfig& cfg) {
  const std::size_t n = basis.values.size();
  if (n == 0) throw InputError("fit: empty basis");
  const Columns cols = match(cl, basis);
  const std::size_t n_free = cfg.normalize ? n - 1 : n;
  // Parameters: Re a_i, Im a_i for the free coefficients; with normalization
  // the last coefficient is 1 - sum of the others.
  FitResult res;
  auto row = [&](std::size_t j) {
    const cplx off = cfg.normalize ? basis.values[n - 1][j] : cplx(0.0);
    std::vector<cplx> coef(2 * n_free);
    for (std::size_t i = 0; i < n_free; ++i) {
      const cplx bij = basis.values[i][j] - off;
      coef[2 * i] = bij;
      coef[2 * i + 1] = cplx(0.0, 1.0) * bij;
    }
    return std::pair{off, coef};
  };
  const LinearModel m = build_model(cl, cols, 2 * n_free, row, res.skipped);
  const LinearSolution sol = solve(m, m.y, cfg.rank_tol);

  // Coefficients as an affine map of theta: a = const + J theta.
  const auto n_par = static_cast<Eigen::Index>(2 * n_free);
  Eigen::MatrixXcd jac = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), n_par);
  for (std::size_t i = 0; i < n_free; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    jac(ii, 2 * ii) = 1.0;
    jac(ii, 2 * ii + 1) = cplx(0.0, 1.0);
    if (cfg.normalize) {
      jac(static_cast<Eigen::Index>(n - 1), 2 * ii) = -1.0;
      jac(static_cast<Eigen::Index>(n - 1), 2 * ii + 1) = cplx(0.0, -1.0);
    }
  }
  auto coefficients = [&](const Eigen::VectorXd& theta) {
    std::vector<cplx> a(n);
    cplx others(0.0);
    for (std::size_t i = 0; i < n_free; ++i) {
      a[i] = cplx(theta(static_cast<Eigen::Index>(2 * i)), theta(static_cast<Eigen::Index>(2 * i + 1)));
      others += a[i];
    }
    if (cfg.normalize) a[n - 1] = 1.0 - others;
    return a;
  };

  res.labels = basis.row_labels;
  res.coefficients = coefficients(sol.theta);
  const Eigen::MatrixXcd cov = jac * sol.covariance.cast<cplx>() * jac.adjoint();
  // Component variances: Re a = Re(J) theta, Im a = Im(J) theta.
  const Eigen::MatrixXd jr = jac.real(), ji = jac.imag();
  const Eigen::MatrixXd cov_re = jr * sol.covariance * jr.transpose();
  const Eigen::MatrixXd cov_im = ji * sol.covariance * ji.transpose();
  res.covariance.assign(n, std::vector<cplx>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < n; ++k) res.covariance[i][k] = cov(ii, static_cast<Eigen::Index>(k));
    res.errors.emplace_back(std::sqrt(std::max(0.0, cov_re(ii, ii))), std::sqrt(std::max(0.0, cov_im(ii, ii))));
  }
  res.chi2 = sol.chi2;
  res.dof = static_cast<int>(m.y.size()) - static_cast<int>(n_par);
  res.used = m.names;
  if (cfg.normalize) {
    cplx sum(0.0);
    for (const auto& a : res.coefficients) sum += a;
    res.constraint_residual = std::abs(sum - 1.0);
  }

  const auto samples = bootstrap(m, cfg);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> re, im;
    for (const auto& th : samples) {
      const cplx a = coefficients(th)[i];
      re.push_back(a.real());
      im.push_back(a.imag());
    }
    res.bootstrap_errors.emplace_back(spread(re), spread(im));
  }
  return res;
}

SymmetricFitResult fit_symmetric(const std::vector<ExpectationRecord>& cl, const FunctionalTable& basis,
                                 const FitConfig& cfg) {
  if (basis.values.size() != 3) throw InputError("fit_symmetric: needs exactly three basis rows");
  const Columns cols = match(cl, basis);
  std::vector<std::string> skipped;
  auto row = [&](std::size_t j) {
    const cplx t3 = basis.values[2][j];
    return std::pair{t3, std::vector<cplx>{0.5 * (basis.values[0][j] + basis.values[1][j]) - t3}};
  };
  const LinearModel m = build_model(cl, cols, 1, row, skipped);
  const LinearSolution sol = solve(m, m.y, cfg.rank_tol);
  SymmetricFitResult res;
  res.b = sol.theta(0);
  res.error = std::sqrt(sol.covariance(0, 0));
  res.chi2 = sol.chi2;
  res.dof = static_cast<int>(m.y.size()) - 1;
  std::vector<double> bs;
  for (const auto& th : bootstrap(m, cfg)) bs.push_back(th(0));
  res.bootstrap_error = spread(bs);
  return res;
}

namespace {

struct Fields {
  const Histogram& h;
  double norm;  // 1 / (total * dx * dy)

  double p(int ix, int iy) const {
    if (iy < 0 || iy >= h.ny()) return 0.0;
    if (h.periodic_x()) ix = (ix % h.nx() + h.nx()) % h.nx();
    if (ix < 0 || ix >= h.nx()) return 0.0;
    return h.count(ix, iy) * norm;
  }
  // (j_x, j_y) in cell (ix, iy).
  std::pair<double, double> current(int ix, int iy) const {
    if (iy < 0 || iy >= h.ny()) return {0.0, 0.0};
    if (h.periodic_x()) ix = (ix % h.nx() + h.nx()) % h.nx();
    if (ix < 0 || ix >= h.nx()) return {0.0, 0.0};
    const double dpx = (p(ix + 1, iy) - p(ix - 1, iy)) / (2.0 * h.dx());
    return {h.sum_vx(ix, iy) * norm - dpx, h.sum_vy(ix, iy) * norm};
  }
};

// Integral of j_x dy - j_y dx along the segment a -> b with cellwise constant j.
double segment_flux(const Fields& f, cplx a, cplx b) {
  const Histogram& h = f.h;
  const cplx dz = b - a;
  std::vector<double> cuts{0.0, 1.0};
  auto add_cuts = [&](double p0, double dp, double lo, double step) {
    if (dp == 0.0) return;
    const double k0 = std::ceil((std::min(p0, p0 + dp) - lo) / step);
    const double k1 = std::floor((std::max(p0, p0 + dp) - lo) / step);
    for (double k = k0; k <= k1; ++k) {
      const double t = (lo + k * step - p0) / dp;
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
  };
  add_cuts(a.real(), dz.real(), h.x_lo(), h.dx());
  add_cuts(a.imag(), dz.imag(), h.y_lo(), h.dy());
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double t0 = cuts[k], t1 = cuts[k + 1];
    if (t1 <= t0) continue;
    const cplx mid = a + 0.5 * (t0 + t1) * dz;
    const int ix = static_cast<int>(std::floor((mid.real() - h.x_lo()) / h.dx()));
    const int iy = static_cast<int>(std::floor((mid.imag() - h.y_lo()) / h.dy()));
    const auto [jx, jy] = f.current(ix, iy);
    const cplx piece = (t1 - t0) * dz;
    total += jx * piece.imag() - jy * piece.real();
  }
  return total;
}

std::vector<cplx> singular_points(const Density& d) {
  std::vector<cplx> out;
  for (const auto& f : d.poly_factors()) out.push_back(to_z_plane(d, f.a));
  for (const auto& p : d.exp_principal()) out.push_back(to_z_plane(d, p.b));
  return out;
}

double distance_to_segment(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double l2 = std::norm(ab);
  const double t = l2 > 0 ? std::clamp(((p - a) * std::conj(ab)).real() / l2, 0.0, 1.0) : 0.0;
  return std::abs(p - (a + t * ab));
}

std::vector<std::pair<cplx, cplx>> segments(const Histogram& h, const FluxCurve& c) {
  std::vector<std::pair<cplx, cplx>> out;
  if (c.cylinder_y) {
    if (!h.periodic_x()) throw InputError("flux: a cylinder line needs a cylinder histogram");
    // Traversed right to left, so that j_x dy - j_y dx integrates the upward flux.
    out.emplace_back(cplx(kTwoPi, *c.cylinder_y), cplx(0.0, *c.cylinder_y));
    return out;
  }
  if (c.vertices.size() < 3) throw InputError("flux: a closed curve needs at least three vertices");
  for (std::size_t k = 0; k < c.vertices.size(); ++k)
    out.emplace_back(c.vertices[k], c.vertices[(k + 1) % c.vertices.size()]);
  return out;
}

void check_clearance(const Histogram& h, const Density& d, const std::vector<std::pair<cplx, cplx>>& segs) {
  const double min_dist = 2.0 * std::max(h.dx(), h.dy());
  for (const cplx s : singular_points(d))
    for (const auto& [a, b] : segs) {
      double dist = distance_to_segment(s, a, b);
      if (h.periodic_x())
        for (double shift : {-kTwoPi, kTwoPi}) dist = std::min(dist, distance_to_segment(s + shift, a, b));
      if (dist < min_dist) {
        std::ostringstream os;
        os << "flux: curve passes within " << dist << " of the singular point (" << s.real() << ", " << s.imag()
           << "); at least two cells (" << min_dist << ") are required";
        throw CurveTooClose(os.str());
      }
    }
}

}  // namespace

double flux_of(const Histogram& h, const Density& d, const FluxCurve& curve) {
  if (h.nx() == 0 || !(h.total() > 0)) throw InputError("flux: empty histogram");
  const auto segs = segments(h, curve);
  check_clearance(h, d, segs);
  const Fields f{h, 1.0 / (h.total() * h.dx() * h.dy())};
  double total = 0.0;
  for (const auto& [a, b] : segs) total += segment_flux(f, a, b);
  return total;
}

FluxResult flux(const CLResult& run, const Density& d, const FluxCurve& curve) {
  FluxResult res;
  res.net_flux = flux_of(run.histogram, d, curve);
  for (const auto& r : run.replicas)
    if (r.total() > 0) res.replica_flux.push_back(flux_of(r, d, curve));
  if (res.replica_flux.size() >= 2)
    res.err = spread(res.replica_flux) / std::sqrt(static_cast<double>(res.replica_flux.size()));
  else
    res.err = std::numeric_limits<double>::infinity();
  return res;
}

DriftCheck check_Tv(const Density& d, const CLConfig& cfg) {
  if (d.mode() != Mode::Cylinder) throw InputError("check_Tv: needs a cylinder density");
  CLConfig c = cfg;
  c.histogram.enabled = false;
  const CLResult r = run(d, {Observable::drift()}, c);
  DriftCheck out;
  out.mean = r.records.at(0).mean;
  out.err = r.records.at(0).err;
  out.mean_abs = r.records.at(0).mean_abs;
  const bool finite = std::isfinite(out.err.real()) && std::isfinite(out.err.imag());
  out.pass = finite && std::abs(out.mean.real()) <= 3.0 * out.err.real() &&
             std::abs(out.mean.imag()) <= 3.0 * out.err.imag();
  return out;
}

IntegralResult functional_drift(const Density& d, const PathSpec& p, const QuadratureConfig& cfg) {
  return integrate_weight(d, p, [&](cplx z) { return drift(d, z); }, cfg);
}

std::string format_with_error(double value, double err) {
  std::ostringstream os;
  if (!(err > 0) || !std::isfinite(err)) {
    os << std::fixed << std::setprecision(4) << value;
    return os.str();
  }
  int decimals = -static_cast<int>(std::floor(std::log10(err)));
  if (std::round(err * std::pow(10.0, decimals)) < 2) ++decimals;
  decimals = std::max(decimals, 0);
  const long digits = std::lround(err * std::pow(10.0, decimals));
  os << std::fixed << std::setprecision(decimals) << value << "(" << digits << ")";
  return os.str();
}

namespace {

std::string format_complex(cplx v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << std::showpos << v.real() << " " << v.imag() << "i";
  return os.str();
}

std::string format_complex_err(cplx v, cplx e) {
  return format_with_error(v.real(), e.real()) + " " + (v.imag() < 0 ? "-" : "+") + " " +
         format_with_error(std::abs(v.imag()), e.imag()) + "i";
}

}  // namespace

std::string table1_text(const FunctionalTable& table, const std::vector<ExpectationRecord>& cl,
                        const std::optional<FitResult>& fit) {
  std::ostringstream os;
  const int w = 30;
  os << std::left << std::setw(12) << "f" << std::setw(w) << "CL";
  if (fit) os << std::setw(w) << "a_1 T_1 + a_2 T_2";
  for (const auto& l : table.row_labels) os << std::setw(w) << l;
  os << "\n";
  for (std::size_t j = 0; j < table.observables.size(); ++j) {
    const Observable& o = table.observables[j];
    os << std::setw(12) << o.label();
    auto rec = std::find_if(cl.begin(), cl.end(), [&](const auto& r) { return r.observable == o; });
    os << std::setw(w) << (rec == cl.end() ? std::string("-") : format_complex_err(rec->mean, rec->err));
    if (fit) {
      cplx comb(0.0);
      for (std::size_t i = 0; i < fit->coefficients.size() && i < table.values.size(); ++i)
        comb += fit->coefficients[i] * table.values[i][j];
      os << std::setw(w) << format_complex(comb);
    }
    for (std::size_t i = 0; i < table.values.size(); ++i)
      os << std::setw(w) << (table.ok(i, j) ? format_complex(table.values[i][j]) : std::string("failed"));
    os << "\n";
  }
  if (fit) {
    os << "\n";
    for (std::size_t i = 0; i < fit->coefficients.size(); ++i)
      os << "a_" << i + 1 << " (" << fit->labels[i] << ") = "
         << format_complex_err(fit->coefficients[i], fit->bootstrap_errors[i]) << "\n";
    os << "chi2/dof = " << std::fixed << std::setprecision(3) << fit->chi2 << "/" << fit->dof << "\n";
  }
  return os.str();
}

}  // namespace clpaths
