#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clpaths/contour.hpp"
#include "clpaths/density.hpp"
#include "clpaths/langevin.hpp"

namespace clpaths {

struct FitConfig {
  bool normalize = true;        // impose sum a_i = 1 (basis rows must be normalized)
  int bootstrap = 200;          // parametric resamples of the records
  std::uint64_t seed = 1;
  double rank_tol = 1e-10;      // relative singular-value threshold of the weighted design
};

struct FitResult {
  std::vector<std::string> labels;
  std::vector<cplx> coefficients;
  std::vector<cplx> errors;                     // parametric, from the covariance
  std::vector<cplx> bootstrap_errors;           // spread of the bootstrap refits
  std::vector<std::vector<cplx>> covariance;    // E[(a_i - <a_i>) conj(a_j - <a_j>)]
  double chi2 = 0.0;
  int dof = 0;
  double constraint_residual = 0.0;             // |sum a_i - 1| when normalized
  std::vector<std::string> used;                // data points entering chi2, e.g. "Re x^2"
  std::vector<std::string> skipped;             // components with zero error
};

/// Weighted complex least squares of the CL records on the basis functionals:
/// <f_j> = sum_i a_i basis.values[i][j]. Re and Im of every record are separate
/// data points with their own errors; components with zero error are skipped.
/// Observables are matched by value; records without a basis column are
/// ignored. Throws RankDeficientBasis when the weighted design is numerically
/// singular and InputError when there are not more data points than free
/// parameters.
FitResult fit(const std::vector<ExpectationRecord>& cl, const FunctionalTable& basis, const FitConfig& cfg = {});

struct SymmetricFitResult {
  double b = 0.0;
  double error = 0.0;            // parametric
  double bootstrap_error = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

/// One real parameter: <f> = b/2 (T_1 + T_2) + (1 - b) T_3 with the three
/// rows of `basis` in that order (normalized functionals).
SymmetricFitResult fit_symmetric(const std::vector<ExpectationRecord>& cl, const FunctionalTable& basis,
                                 const FitConfig& cfg = {});

/// A closed polygon, or on the cylinder the line Im z = y0 traversed in the
/// direction of increasing x.
struct FluxCurve {
  std::vector<cplx> vertices;
  std::optional<double> cylinder_y;

  static FluxCurve polygon(std::vector<cplx> vertices) { return {std::move(vertices), std::nullopt}; }
  static FluxCurve cylinder_line(double y0) { return {{}, y0}; }
};

struct FluxResult {
  double net_flux = 0.0;
  double err = 0.0;                   // replica spread, standard error of the mean
  std::vector<double> replica_flux;
};

/// Net outward flux (counter-clockwise polygon) or upward flux (cylinder line)
/// of the stationary current j_x = v_x P - d_x P, j_y = v_y P, with P the
/// histogram normalized to unit mass. The curve is cut at every cell boundary
/// and each piece uses the values of its cell; d_x P is a central difference.
/// Throws CurveTooClose when the curve passes within two cells of a factor
/// location or essential singularity.
FluxResult flux(const CLResult& run, const Density& d, const FluxCurve& curve);

/// Same for a single histogram, without an error estimate.
double flux_of(const Histogram& h, const Density& d, const FluxCurve& curve);

struct DriftCheck {
  cplx mean;
  cplx err;
  double mean_abs = 0.0;  // <|v|>, monitors absolute convergence
  bool pass = false;      // both components within 3 err of zero, finite errors
};

/// <v> from a CL run of a Cylinder density.
DriftCheck check_Tv(const Density& d, const CLConfig& cfg);

/// (T_gamma, v) for an exact path functional.
IntegralResult functional_drift(const Density& d, const PathSpec& p, const QuadratureConfig& cfg = {});

/// Text table with the columns f, CL, fitted combination of the first two
/// basis rows, and every basis row. Rows are the observables of `table`.
std::string table1_text(const FunctionalTable& table, const std::vector<ExpectationRecord>& cl,
                        const std::optional<FitResult>& fit);

/// "0.5244(2)": value rounded at the first significant digit of err (two when
/// that digit is 1), with the error in units of the last digit.
std::string format_with_error(double value, double err);

}  // namespace clpaths
