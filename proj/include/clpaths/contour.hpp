#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "clpaths/density.hpp"
#include "clpaths/endpoint.hpp"

namespace clpaths {

/// Test function. Monomial z^m and exponential e^{ikz} are the admitted
/// observables; drift and sd_image are derived quantities used for checks
/// (v itself and Af = f' + v f).
class Observable {
 public:
  enum class Kind { Monomial, Exponential, Drift };

  static Observable monomial(int m);
  static Observable exponential(int k);
  static Observable drift();
  /// The Schwinger-Dyson image Af = f' + v f of this observable.
  Observable sd_image() const;

  Kind kind() const { return kind_; }
  int index() const { return index_; }
  bool is_sd_image() const { return sd_image_; }

  /// f(z) (or (Af)(z) for an sd_image).
  cplx operator()(const Density& d, cplx z) const;
  /// Same, given the drift v at z.
  cplx with_drift(cplx z, cplx v) const;
  /// f'(z); only for Monomial and Exponential.
  cplx derivative(cplx z) const;

  /// Whether the observable belongs to the test-function domain of `mode`.
  bool admitted(Mode mode) const;

  /// "x^2", "exp(-1ix)", "v", "A[x^2]".
  std::string label() const;
  static Observable parse(const std::string& label);

  bool operator==(const Observable&) const = default;

 private:
  Observable(Kind kind, int index, bool sd) : kind_(kind), index_(index), sd_image_(sd) {}
  cplx base_value(cplx z) const;

  Kind kind_;
  int index_;
  bool sd_image_;
};

/// An oriented open path joining two generalized zeroes, or a closed path.
///
/// Open paths: the polyline start -> waypoints -> end. Infinite tails follow
/// the endpoint's canonical direction starting from the adjacent node; an
/// essential-singularity tail starts at b + radius e^{i angle}. Closed paths:
/// the cyclic polyline through the waypoints; in Cylinder mode the closing
/// segment is shifted by 2 pi * winding.
struct PathSpec {
  enum class Kind { Open, Closed };

  Kind kind = Kind::Open;
  std::optional<Endpoint> start;
  std::optional<Endpoint> end;
  std::vector<cplx> waypoints;
  std::vector<std::string> enclosed;
  int winding = 0;
  std::string label;

  static PathSpec open(Endpoint start, Endpoint end, std::vector<cplx> waypoints, std::string label);
  static PathSpec closed(std::vector<cplx> waypoints, int winding, std::vector<std::string> enclosed,
                         std::string label);
};

struct QuadratureConfig {
  double tol = 1e-10;       // absolute
  double rel_tol = 1e-10;   // relative to the integral of |rho f|
  double tail_eps = 1e-16;
  double max_extent = 50.0;
  double eps_path = 1e-3;
  int max_intervals = 4000;
};

/// One path per independent functional: a star of open paths from a root
/// generalized zero to every other zero approach, one loop around each pole and
/// essential singularity, and (Cylinder) the path winding the cylinder once.
/// Returns exactly census.n_gamma paths; an empty list when n_gamma = 0.
std::vector<PathSpec> spanning_paths(const SingularityCensus& census);

struct IntegralResult {
  cplx value;
  double abs_err = 0.0;
  double l1 = 0.0;  // integral of |rho g| |dz|
};

/// (T_gamma, g) = integral over the path of rho(z) g(z) dz for an arbitrary
/// holomorphic weight g. Throws NoDecay when a tail does not fall below
/// tail_eps within max_extent, QuadratureFail when the error estimate exceeds
/// the tolerance, SingularityTooClose when a segment passes within eps_path of
/// a pole or essential singularity.
IntegralResult integrate_weight(const Density& d, const PathSpec& p,
                                const std::function<cplx(cplx)>& weight,
                                const QuadratureConfig& cfg = {});

/// Same with the weight given as log g. The integrand exp(log rho + log g)
/// stays finite where rho underflows and g overflows.
IntegralResult integrate_log_weight(const Density& d, const PathSpec& p,
                                    const std::function<cplx(cplx)>& log_weight,
                                    const QuadratureConfig& cfg = {});

/// (T_gamma, f) with its error estimate.
IntegralResult integrate_detailed(const Density& d, const PathSpec& p, const Observable& f,
                                  const QuadratureConfig& cfg = {});

/// (T_gamma, f).
cplx integrate(const Density& d, const PathSpec& p, const Observable& f,
               const QuadratureConfig& cfg = {});

struct FunctionalTable {
  std::vector<std::string> row_labels;
  std::vector<Observable> observables;
  std::vector<std::vector<cplx>> values;    // [path][observable]
  std::vector<std::vector<double>> errors;  // absolute, after normalization
  std::vector<std::vector<std::string>> failures;  // empty string when the cell succeeded
  std::vector<cplx> norms;                 // (T_gamma, 1) per row when normalized

  bool ok(std::size_t i, std::size_t j) const { return failures[i][j].empty(); }
  bool all_ok() const;
};

/// Element (i, j) = (T_{gamma_i}, f_j), optionally divided by (T_{gamma_i}, 1).
/// Integration failures are recorded per cell instead of thrown.
FunctionalTable functional_table(const Density& d, const std::vector<PathSpec>& paths,
                                 const std::vector<Observable>& obs, const QuadratureConfig& cfg = {},
                                 bool normalize = false);

/// Polyline vertices of a path (tails excluded), for plotting and tests.
std::vector<cplx> path_nodes(const PathSpec& p);

}  // namespace clpaths
