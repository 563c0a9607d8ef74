#include "clpaths/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "clpaths/errors.hpp"

namespace clpaths {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string fmt_z(cplx z) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// BinningAccumulator

void BinningAccumulator::push(std::size_t level, double x) {
  for (;;) {
    if (levels_.size() <= level) levels_.emplace_back();
    Stats& s = levels_[level];
    ++s.n;
    const double delta = x - s.mean;
    s.mean += delta / static_cast<double>(s.n);
    s.m2 += delta * (x - s.mean);
    if (!s.has_pending) {
      s.pending = x;
      s.has_pending = true;
      return;
    }
    x = 0.5 * (s.pending + x);
    s.has_pending = false;
    ++level;
  }
}

void BinningAccumulator::add(double x) {
  total_ += x;
  ++count_;
  push(0, x);
}

void BinningAccumulator::merge(const BinningAccumulator& other) {
  total_ += other.total_;
  count_ += other.count_;
  if (levels_.size() < other.levels_.size()) levels_.resize(other.levels_.size());
  for (std::size_t k = 0; k < other.levels_.size(); ++k) {
    Stats& a = levels_[k];
    const Stats& b = other.levels_[k];
    if (b.n == 0) continue;
    const double n = static_cast<double>(a.n + b.n);
    const double delta = b.mean - a.mean;
    a.m2 += b.m2 + delta * delta * static_cast<double>(a.n) * static_cast<double>(b.n) / n;
    a.mean += delta * static_cast<double>(b.n) / n;
    a.n += b.n;
  }
}

std::vector<BinningAccumulator::Level> BinningAccumulator::levels() const {
  std::vector<Level> out;
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    const Stats& s = levels_[k];
    if (s.n < 2) break;
    const double var = s.m2 / static_cast<double>(s.n - 1);
    out.push_back({std::uint64_t{1} << k, s.n, std::sqrt(std::max(var, 0.0) / static_cast<double>(s.n))});
  }
  return out;
}

double BinningAccumulator::error(std::uint64_t min_blocks) const {
  double best = 0.0;
  for (const auto& l : levels())
    if (l.n_blocks >= min_blocks) best = std::max(best, l.error);
  if (best == 0.0) return naive_error();
  return best;
}

double BinningAccumulator::naive_error() const {
  const auto l = levels();
  return l.empty() ? 0.0 : l.front().error;
}

// ---------------------------------------------------------------------------
// Histogram

Histogram::Histogram(int nx, int ny, double x_lo, double x_hi, double y_lo, double y_hi, bool periodic_x)
    : nx_(nx),
      ny_(ny),
      cx_(0.5 * (x_lo + x_hi)),
      cy_(0.5 * (y_lo + y_hi)),
      hx_(0.5 * (x_hi - x_lo)),
      hy_(0.5 * (y_hi - y_lo)),
      periodic_x_(periodic_x),
      counts_(static_cast<std::size_t>(nx) * ny, 0.0),
      vx_(counts_.size(), 0.0),
      vy_(counts_.size(), 0.0) {
  if (nx <= 0 || ny <= 0 || nx % 4 != 0 || ny % 4 != 0)
    throw InputError("histogram sizes must be positive multiples of 4");
  if (!(hx_ > 0) || !(hy_ > 0)) throw InputError("histogram box must have positive extent");
}

Histogram Histogram::from_channels(int nx, int ny, double x_lo, double x_hi, double y_lo, double y_hi,
                                   bool periodic_x, std::vector<double> counts, std::vector<double> vx,
                                   std::vector<double> vy) {
  Histogram h(nx, ny, x_lo, x_hi, y_lo, y_hi, periodic_x);
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (counts.size() != n || vx.size() != n || vy.size() != n)
    throw InputError("histogram channel sizes do not match the grid");
  h.counts_ = std::move(counts);
  h.vx_ = std::move(vx);
  h.vy_ = std::move(vy);
  h.total_ = 0.0;
  for (double c : h.counts_) h.total_ += c;
  return h;
}

cplx Histogram::cell_center(int ix, int iy) const {
  return {x_lo() + (ix + 0.5) * dx(), y_lo() + (iy + 0.5) * dy()};
}

void Histogram::double_x() {
  std::vector<double> c(counts_.size(), 0.0), a(counts_.size(), 0.0), b(counts_.size(), 0.0);
  for (int iy = 0; iy < ny_; ++iy)
    for (int ix = 0; ix < nx_; ++ix) {
      const std::size_t to = index((ix + nx_ / 2) / 2, iy), from = index(ix, iy);
      c[to] += counts_[from];
      a[to] += vx_[from];
      b[to] += vy_[from];
    }
  counts_.swap(c);
  vx_.swap(a);
  vy_.swap(b);
  hx_ *= 2.0;
}

void Histogram::double_y() {
  std::vector<double> c(counts_.size(), 0.0), a(counts_.size(), 0.0), b(counts_.size(), 0.0);
  for (int iy = 0; iy < ny_; ++iy)
    for (int ix = 0; ix < nx_; ++ix) {
      const std::size_t to = index(ix, (iy + ny_ / 2) / 2), from = index(ix, iy);
      c[to] += counts_[from];
      a[to] += vx_[from];
      b[to] += vy_[from];
    }
  counts_.swap(c);
  vx_.swap(a);
  vy_.swap(b);
  hy_ *= 2.0;
}

void Histogram::expand_to(double x_half, double y_half) {
  while (!periodic_x_ && hx_ < x_half * (1.0 - 1e-12)) double_x();
  while (hy_ < y_half * (1.0 - 1e-12)) double_y();
}

void Histogram::add(cplx z, cplx v) {
  double x = z.real();
  const double y = z.imag();
  if (periodic_x_) {
    x = std::fmod(x, kTwoPi);
    if (x < 0) x += kTwoPi;
  }
  if (!std::isfinite(x) || !std::isfinite(y)) return;
  while (!periodic_x_ && std::abs(x - cx_) >= hx_) double_x();
  while (std::abs(y - cy_) >= hy_) double_y();
  int ix = static_cast<int>(std::floor((x - x_lo()) / dx()));
  int iy = static_cast<int>(std::floor((y - y_lo()) / dy()));
  ix = std::clamp(ix, 0, nx_ - 1);
  iy = std::clamp(iy, 0, ny_ - 1);
  const std::size_t k = index(ix, iy);
  counts_[k] += 1.0;
  vx_[k] += v.real();
  vy_[k] += v.imag();
  total_ += 1.0;
}

void Histogram::merge(const Histogram& other) {
  if (other.nx_ != nx_ || other.ny_ != ny_ || other.periodic_x_ != periodic_x_ || other.cx_ != cx_ ||
      other.cy_ != cy_)
    throw InputError("histograms do not share a grid");
  Histogram o = other;
  expand_to(o.hx_, o.hy_);
  o.expand_to(hx_, hy_);
  if (std::abs(o.hx_ - hx_) > 1e-12 * hx_ || std::abs(o.hy_ - hy_) > 1e-12 * hy_)
    throw InputError("histogram boxes are not related by doubling");
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    counts_[k] += o.counts_[k];
    vx_[k] += o.vx_[k];
    vy_[k] += o.vy_[k];
  }
  total_ += o.total_;
}

// ---------------------------------------------------------------------------
// Stepping

cplx step(cplx z, cplx v, double dt_eff, double noise) {
  return z + v * dt_eff + std::sqrt(2.0 * dt_eff) * noise;
}

cplx step(const Density& d, cplx z, double dt_eff, double noise) { return step(z, drift(d, z), dt_eff, noise); }

double effective_dt(const CLConfig& cfg, cplx v) {
  if (!cfg.adaptive) return cfg.dt;
  const double v2 = std::norm(v);
  return v2 > 0 ? std::min(cfg.dt, cfg.dt_cap_factor / v2) : cfg.dt;
}

std::mt19937_64 walker_stream(std::uint64_t seed, int walker) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(walker), 0x434c7761u};
  return std::mt19937_64(seq);
}

void validate(const CLConfig& cfg) {
  auto bad = [](const std::string& m) { throw ConfigError("cl: " + m); };
  if (cfg.n_walkers <= 0) bad("n_walkers must be positive");
  if (!(cfg.dt > 0)) bad("dt must be positive");
  if (!(cfg.t_burn >= 0)) bad("t_burn must be non-negative");
  if (!(cfg.t_measure > 0)) bad("t_measure must be positive");
  if (!(cfg.meas_interval > 0) || cfg.meas_interval > cfg.t_measure) bad("meas_interval must be in (0, t_measure]");
  if (!(cfg.dt_cap_factor > 0)) bad("dt_cap_factor must be positive");
  if (!(cfg.y_cap > 0)) bad("y_cap must be positive");
  if (cfg.histogram.enabled) {
    if (cfg.histogram.nx <= 0 || cfg.histogram.ny <= 0 || cfg.histogram.nx % 4 || cfg.histogram.ny % 4)
      bad("histogram nx, ny must be positive multiples of 4");
    if (cfg.histogram.replicas <= 0) bad("histogram replicas must be positive");
  }
  if (cfg.trace_walkers < 0) bad("trace_walkers must be non-negative");
  if (cfg.trace_walkers > 0 && !(cfg.trace_interval > 0)) bad("trace_interval must be positive");
  if (cfg.threads <= 0) bad("threads must be positive");
}

namespace {

struct Anchor {
  std::size_t factor = 0;
  cplx z;
};

// Within kAnchorRadius of a zero of rho the walker is carried by L = log(z -
// zero), split into log|z - zero| and a unit direction, and stepped by
// Euler-Maruyama on dL = (u v - 1) / u^2 dt + sqrt(2) dW / u (u = z - zero). For a simple zero Re L has no drift, and a real walker keeps
// its side of a real zero. Re L is reflected at kLogFloor, below which an
// excursion takes no resolvable process time.
constexpr double kAnchorRadius = 1e-3;
const double kLogFloor = std::log(kAnchorRadius) - 50.0;
constexpr std::uint64_t kMaxStepsPerInterval = 1'000'000'000;

std::vector<Anchor> find_anchors(const Density& d, const CLConfig& cfg) {
  std::vector<Anchor> out;
  if (!cfg.adaptive) return out;
  for (std::size_t l = 0; l < d.poly_factors().size(); ++l)
    if (d.poly_factors()[l].alpha > 0 && !d.coinciding_principal(l))
      out.push_back({l, to_z_plane(d, d.poly_factors()[l].a)});
  return out;
}

struct Walker {
  int id = 0;
  cplx z;
  int anchor = -1;
  double log_r = 0.0;  // log |z - zero|
  cplx dir;            // (z - zero) / |z - zero|
  std::mt19937_64 rng;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uint64_t steps = 0;
  double min_dt = std::numeric_limits<double>::infinity();
};

class Mover {
 public:
  Mover(const Density& d, const CLConfig& cfg, const std::vector<Anchor>& anchors)
      : d_(d), cfg_(cfg), anchors_(anchors), cyl_(d.mode() == Mode::Cylinder) {}

  // Advances the walker by `duration`, calling on_sample(z, v, t) at every
  // multiple of `interval` (steps are shortened to land on those times).
  template <class OnSample>
  void advance(Walker& w, double duration, double interval, OnSample&& on_sample) const {
    const auto n_samples = static_cast<std::uint64_t>(std::floor(duration / interval + 1e-9));
    // Time is kept as an offset within the current sampling interval.
    double tau = 0.0;
    std::uint64_t k = 1, steps_here = 0;
    attach(w);
    cplx v = velocity(w, 0.0);
    while (k <= n_samples) {
      const double t = static_cast<double>(k - 1) * interval + tau;
      if (++steps_here > kMaxStepsPerInterval)
        throw SingularHit("walker " + std::to_string(w.id) + ": step size collapsed near z = " + fmt_z(w.z) +
                          ", t = " + std::to_string(t));
      double h;
      bool lands = false;
      if (w.anchor >= 0) {
        // v is u v here.
        const double u2 = std::exp(2.0 * w.log_r);
        double s = std::min(cfg_.dt / u2, cfg_.dt_cap_factor / std::norm(v));
        h = s * u2;
        if (tau + h >= interval * (1.0 - 1e-12)) {
          h = interval - tau;
          s = h / u2;
          lands = true;
        }
        const cplx phase = std::conj(w.dir);
        const cplx dl = (v - 1.0) * s * phase * phase + std::sqrt(2.0 * s) * w.normal(w.rng) * phase;
        w.log_r += dl.real();
        if (w.log_r < kLogFloor) w.log_r = 2.0 * kLogFloor - w.log_r;
        if (dl.imag() != 0.0) {
          w.dir *= std::polar(1.0, dl.imag());
          w.dir /= std::abs(w.dir);
        }
        w.z = anchors_[static_cast<std::size_t>(w.anchor)].z + offset(w);
      } else {
        h = effective_dt(cfg_, v);
        if (!(h > 0))
          throw SingularHit("walker " + std::to_string(w.id) + ": no admissible step near z = " + fmt_z(w.z) +
                            ", t = " + std::to_string(t));
        if (tau + h >= interval * (1.0 - 1e-12)) {
          h = interval - tau;
          lands = true;
        }
        if (h > 0) w.z = step(w.z, v, h, w.normal(w.rng));
      }
      ++w.steps;
      if (h > 0) w.min_dt = std::min(w.min_dt, h);
      tau = lands ? 0.0 : tau + h;
      if (cyl_ && (w.z.real() < 0 || w.z.real() >= kTwoPi)) {
        double x = std::fmod(w.z.real(), kTwoPi);
        if (x < 0) x += kTwoPi;
        w.z = {x, w.z.imag()};
      }
      if (!(std::abs(w.z.imag()) <= cfg_.y_cap))
        throw Runaway("walker " + std::to_string(w.id) + " left |Im z| <= " + std::to_string(cfg_.y_cap) +
                      " at t = " + std::to_string(t + h) + ", z = " + fmt_z(w.z));
      attach(w);
      v = velocity(w, t + h);
      if (lands) {
        on_sample(w.z, w.anchor >= 0 ? v / offset(w) : v, static_cast<double>(k) * interval);
        ++k;
        steps_here = 0;
      }
    }
  }

 private:
  void attach(Walker& w) const {
    if (w.anchor >= 0) {
      if (w.log_r <= std::log(kAnchorRadius)) return;
      w.anchor = -1;
    }
    for (std::size_t k = 0; k < anchors_.size(); ++k) {
      cplx u = w.z - anchors_[k].z;
      if (cyl_) u.real(std::remainder(u.real(), kTwoPi));
      if (std::norm(u) < kAnchorRadius * kAnchorRadius && u != cplx(0.0)) {
        w.anchor = static_cast<int>(k);
        w.log_r = std::log(std::abs(u));
        w.dir = u / std::abs(u);
        return;
      }
    }
  }

  static cplx offset(const Walker& w) { return w.dir * std::exp(w.log_r); }

  // The drift, or u v for an anchored walker.
  cplx velocity(const Walker& w, double t) const {
    cplx v;
    try {
      v = w.anchor >= 0
              ? offset_drift(d_, anchors_[static_cast<std::size_t>(w.anchor)].factor, offset(w))
              : drift(d_, w.z);
    } catch (const SingularityTooClose&) {
      throw SingularHit("walker " + std::to_string(w.id) + " reached a singularity at z = " + fmt_z(w.z) +
                        ", t = " + std::to_string(t));
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw SingularHit("walker " + std::to_string(w.id) + ": non-finite drift at z = " + fmt_z(w.z));
    return v;
  }

  const Density& d_;
  const CLConfig& cfg_;
  const std::vector<Anchor>& anchors_;
  bool cyl_;
};

struct GroupResult {
  std::vector<std::vector<BinningAccumulator>> acc;  // [walker in group][3 * observable]: Re, Im, abs
  Histogram hist;
  std::vector<TracePoint> traces;
};

}  // namespace

CLResult run(const Density& d, const std::vector<Observable>& obs, const CLConfig& cfg) {
  validate(cfg);
  for (const auto& o : obs)
    if (!o.admitted(d.mode()) && o.kind() != Observable::Kind::Drift)
      throw ConfigError("observable " + o.label() + " is not admitted in cylinder mode");

  const bool cyl = d.mode() == Mode::Cylinder;
  const int n_rep = cfg.histogram.enabled ? std::min(cfg.histogram.replicas, cfg.n_walkers) : 1;

  const std::vector<Anchor> anchors = find_anchors(d, cfg);
  const Mover mover(d, cfg, anchors);
  std::vector<Walker> walkers(static_cast<std::size_t>(cfg.n_walkers));
  for (int i = 0; i < cfg.n_walkers; ++i) {
    Walker& w = walkers[static_cast<std::size_t>(i)];
    w.id = i;
    w.z = cfg.start_points.empty() ? cplx(0.0) : cfg.start_points[static_cast<std::size_t>(i) % cfg.start_points.size()];
    w.rng = walker_stream(cfg.seed, i);
    try {
      (void)drift(d, w.z);
    } catch (const SingularityTooClose&) {
      throw ConfigError("start point " + fmt_z(w.z) + " is at a singularity of the drift");
    }
  }

  const int n_threads = std::max(1, std::min(cfg.threads, n_rep));
  auto parallel = [&](int n_tasks, auto&& task) {
    if (n_threads == 1) {
      for (int i = 0; i < n_tasks; ++i) task(i);
      return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_tasks));
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        for (int i = t; i < n_tasks; i += n_threads) {
          try {
            task(i);
          } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };

  // Burn-in; extents of the visited region seed the histogram box.
  const double burn_interval = std::min(cfg.meas_interval, std::max(cfg.t_burn, cfg.meas_interval));
  std::vector<double> lo_x(walkers.size()), hi_x(walkers.size()), lo_y(walkers.size()), hi_y(walkers.size());
  parallel(n_rep, [&](int r) {
    for (std::size_t i = static_cast<std::size_t>(r); i < walkers.size(); i += static_cast<std::size_t>(n_rep)) {
      Walker& w = walkers[i];
      lo_x[i] = hi_x[i] = w.z.real();
      lo_y[i] = hi_y[i] = w.z.imag();
      auto track = [&](cplx z, cplx, double) {
        lo_x[i] = std::min(lo_x[i], z.real());
        hi_x[i] = std::max(hi_x[i], z.real());
        lo_y[i] = std::min(lo_y[i], z.imag());
        hi_y[i] = std::max(hi_y[i], z.imag());
      };
      if (cfg.t_burn > 0) mover.advance(w, cfg.t_burn, burn_interval, track);
    }
  });

  Histogram proto;
  if (cfg.histogram.enabled) {
    double x0 = *std::min_element(lo_x.begin(), lo_x.end()), x1 = *std::max_element(hi_x.begin(), hi_x.end());
    double y0 = *std::min_element(lo_y.begin(), lo_y.end()), y1 = *std::max_element(hi_y.begin(), hi_y.end());
    if (cyl) {
      x0 = 0.0;
      x1 = kTwoPi;
    } else {
      const double hx = std::max(0.5 * (x1 - x0) * 1.25, 1e-3);
      const double cx = 0.5 * (x0 + x1);
      x0 = cx - hx;
      x1 = cx + hx;
    }
    const double hy = std::max({0.5 * (y1 - y0) * 1.25, 0.05 * (x1 - x0), 1e-3});
    const double cy = 0.5 * (y0 + y1);
    proto = Histogram(cfg.histogram.nx, cfg.histogram.ny, x0, x1, cy - hy, cy + hy, cyl);
  }

  // Measurement, one walker group per replica histogram.
  const std::size_t n_obs = obs.size();
  std::vector<GroupResult> groups(static_cast<std::size_t>(n_rep));
  parallel(n_rep, [&](int r) {
    GroupResult& g = groups[static_cast<std::size_t>(r)];
    if (cfg.histogram.enabled) g.hist = proto;
    for (std::size_t i = static_cast<std::size_t>(r); i < walkers.size(); i += static_cast<std::size_t>(n_rep)) {
      Walker& w = walkers[i];
      std::vector<BinningAccumulator> acc(3 * n_obs);
      const bool traced = w.id < cfg.trace_walkers;
      double next_trace = 0.0;
      auto sample = [&](cplx z, cplx v, double t) {
        for (std::size_t k = 0; k < n_obs; ++k) {
          const cplx f = obs[k].with_drift(z, v);
          acc[3 * k].add(f.real());
          acc[3 * k + 1].add(f.imag());
          acc[3 * k + 2].add(std::abs(f));
        }
        if (cfg.histogram.enabled) g.hist.add(z, v);
        if (traced && t >= next_trace - 1e-12) {
          g.traces.push_back({w.id, t, z});
          next_trace += cfg.trace_interval;
        }
      };
      mover.advance(w, cfg.t_measure, cfg.meas_interval, sample);
      g.acc.push_back(std::move(acc));
    }
  });

  CLResult res;
  // Deterministic reduction in walker order.
  std::vector<BinningAccumulator> total(3 * n_obs);
  for (std::size_t i = 0; i < walkers.size(); ++i) {
    const auto& a = groups[i % static_cast<std::size_t>(n_rep)].acc[i / static_cast<std::size_t>(n_rep)];
    for (std::size_t k = 0; k < 3 * n_obs; ++k) total[k].merge(a[k]);
    res.steps += walkers[i].steps;
  }
  res.min_dt_eff = std::numeric_limits<double>::infinity();
  for (const auto& w : walkers) res.min_dt_eff = std::min(res.min_dt_eff, w.min_dt);

  for (std::size_t k = 0; k < n_obs; ++k) {
    ExpectationRecord rec;
    rec.observable = obs[k];
    const auto& re = total[3 * k];
    const auto& im = total[3 * k + 1];
    rec.mean = {re.mean(), im.mean()};
    rec.mean_abs = total[3 * k + 2].mean();
    rec.err = {re.error(), im.error()};
    rec.n_samples = re.count();
    double tau = 0.0;
    for (const auto* a : {&re, &im}) {
      const double naive = a->naive_error();
      if (naive > 0) tau = std::max(tau, 0.5 * std::pow(a->error() / naive, 2) * cfg.meas_interval);
    }
    rec.tau_int = tau;
    rec.decay_unverified = obs[k].kind() == Observable::Kind::Exponential && std::abs(obs[k].index()) > 1;
    res.records.push_back(rec);
  }

  if (cfg.histogram.enabled) {
    double hx = 0.0, hy = 0.0;
    for (const auto& g : groups) {
      hx = std::max(hx, g.hist.half_x());
      hy = std::max(hy, g.hist.half_y());
    }
    res.histogram = proto;
    res.histogram.expand_to(hx, hy);
    for (auto& g : groups) {
      g.hist.expand_to(hx, hy);
      res.histogram.merge(g.hist);
      res.replicas.push_back(std::move(g.hist));
    }
  }
  for (const auto& g : groups) res.traces.insert(res.traces.end(), g.traces.begin(), g.traces.end());
  std::stable_sort(res.traces.begin(), res.traces.end(),
                   [](const TracePoint& a, const TracePoint& b) { return a.walker < b.walker; });
  return res;
}

}  // namespace clpaths
