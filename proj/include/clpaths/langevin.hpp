#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "clpaths/contour.hpp"
#include "clpaths/density.hpp"

namespace clpaths {

/// Mean and blocked-variance estimate of a real time series. Level k holds the
/// means of consecutive blocks of 2^k samples (Welford statistics), so that
/// the standard error can be read off at growing block sizes.
class BinningAccumulator {
 public:
  void add(double x);
  /// Adds the completed blocks of another series of the same quantity.
  void merge(const BinningAccumulator& other);

  std::uint64_t count() const { return count_; }
  double mean() const { return count_ ? total_ / static_cast<double>(count_) : 0.0; }

  struct Level {
    std::uint64_t block_size = 0;
    std::uint64_t n_blocks = 0;
    double error = 0.0;
  };
  std::vector<Level> levels() const;

  /// Largest standard error over the levels with at least min_blocks blocks.
  double error(std::uint64_t min_blocks = 64) const;
  /// Standard error at block size 1.
  double naive_error() const;

 private:
  struct Stats {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double pending = 0.0;
    bool has_pending = false;
  };
  void push(std::size_t level, double x);

  std::vector<Stats> levels_;
  double total_ = 0.0;
  std::uint64_t count_ = 0;
};

/// Visit density of the walkers on a uniform grid with, per cell, the sample
/// count and the sums of Re v and Im v at the samples. The box is symmetric
/// around a fixed center; when a sample falls outside it the box is doubled in
/// that direction and pairs of cells are merged. Cylinder grids keep x fixed
/// to [0, 2 pi).
class Histogram {
 public:
  Histogram() = default;
  Histogram(int nx, int ny, double x_lo, double x_hi, double y_lo, double y_hi, bool periodic_x);

  void add(cplx z, cplx v);
  /// Accumulates another histogram built from the same initial box.
  void merge(const Histogram& other);
  /// Doubles the box around its center (until it matches `x_half`, `y_half`).
  void expand_to(double x_half, double y_half);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double x_lo() const { return cx_ - hx_; }
  double x_hi() const { return cx_ + hx_; }
  double y_lo() const { return cy_ - hy_; }
  double y_hi() const { return cy_ + hy_; }
  double dx() const { return 2.0 * hx_ / nx_; }
  double dy() const { return 2.0 * hy_ / ny_; }
  bool periodic_x() const { return periodic_x_; }
  double total() const { return total_; }
  double half_x() const { return hx_; }
  double half_y() const { return hy_; }

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx_ + ix; }
  double count(int ix, int iy) const { return counts_[index(ix, iy)]; }
  double sum_vx(int ix, int iy) const { return vx_[index(ix, iy)]; }
  double sum_vy(int ix, int iy) const { return vy_[index(ix, iy)]; }
  cplx cell_center(int ix, int iy) const;

  const std::vector<double>& counts() const { return counts_; }
  const std::vector<double>& vx_sums() const { return vx_; }
  const std::vector<double>& vy_sums() const { return vy_; }

  /// Raw construction from stored channels (used when reading files back).
  static Histogram from_channels(int nx, int ny, double x_lo, double x_hi, double y_lo, double y_hi,
                                 bool periodic_x, std::vector<double> counts, std::vector<double> vx,
                                 std::vector<double> vy);

  bool operator==(const Histogram&) const = default;

 private:
  void double_x();
  void double_y();

  int nx_ = 0, ny_ = 0;
  double cx_ = 0.0, cy_ = 0.0, hx_ = 1.0, hy_ = 1.0;
  bool periodic_x_ = false;
  double total_ = 0.0;
  std::vector<double> counts_, vx_, vy_;
};

struct HistogramConfig {
  bool enabled = true;
  int nx = 400;
  int ny = 400;
  int replicas = 16;  // independent walker groups, for error estimates
};

struct CLConfig {
  int n_walkers = 64;
  double dt = 1e-4;
  double t_burn = 50.0;
  double t_measure = 5000.0;  // per walker
  std::uint64_t seed = 1;
  bool adaptive = true;
  double dt_cap_factor = 0.1;
  std::vector<cplx> start_points;  // walker w starts at start_points[w % size]
  double meas_interval = 0.05;
  double y_cap = 50.0;
  HistogramConfig histogram;
  int trace_walkers = 0;       // number of walkers whose trajectories are kept
  double trace_interval = 0.5;
  int threads = 1;
};

struct ExpectationRecord {
  Observable observable = Observable::monomial(0);
  cplx mean;
  cplx err;  // standard errors of the real and imaginary parts
  std::uint64_t n_samples = 0;
  double tau_int = 0.0;  // integrated autocorrelation time, process-time units
  double mean_abs = 0.0; // <|f|>, monitors absolute convergence
  /// Fourier modes |k| > 1: absolute convergence of the estimate is not
  /// guaranteed, and it is flagged as such.
  bool decay_unverified = false;
};

struct TracePoint {
  int walker = 0;
  double t = 0.0;
  cplx z;
};

struct CLResult {
  std::vector<ExpectationRecord> records;
  Histogram histogram;                // all walkers
  std::vector<Histogram> replicas;    // one per walker group, same box as `histogram`
  std::vector<TracePoint> traces;
  std::uint64_t steps = 0;
  double min_dt_eff = 0.0;
};

/// One Euler-Maruyama step with real noise: z + v dt + sqrt(2 dt) noise.
cplx step(cplx z, cplx v, double dt_eff, double noise);
/// Same with v = drift(d, z).
cplx step(const Density& d, cplx z, double dt_eff, double noise);

/// Effective step: min(dt, dt_cap_factor / |v|^2) when adaptive.
double effective_dt(const CLConfig& cfg, cplx v);

/// Per-walker random stream derived from (seed, walker).
std::mt19937_64 walker_stream(std::uint64_t seed, int walker);

/// Ensemble simulation. Throws Runaway when a walker leaves |Im z| <= y_cap,
/// SingularHit when the step cannot be kept finite near a singularity and
/// InputError for invalid configurations or start points.
CLResult run(const Density& d, const std::vector<Observable>& obs, const CLConfig& cfg);

/// Validates cfg (positive sizes and times, grid sizes multiples of 4, ...).
/// More replicas than walkers are clamped to one replica per walker.
void validate(const CLConfig& cfg);

}  // namespace clpaths
