#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "clpaths/endpoint.hpp"

namespace clpaths {

enum class Mode { Line, Cylinder };

/// (z - a)^alpha in Line mode, (omega - a)^alpha in Cylinder mode.
struct PolyFactor {
  cplx a;
  int alpha = 0;
};

/// Principal part sum_r d[r-1] / (z - b)^r, r = 1..d.size().
struct PrincipalPart {
  cplx b;
  std::vector<cplx> d;

  int order() const { return static_cast<int>(d.size()); }
};

/// Factored density of rational type
///
///   Line:      rho(z) = prod (z - a_l)^alpha_l * exp(Q(z) + R_s(z))
///   Cylinder:  rho(z) = omega^gamma * prod (omega - a_l)^alpha_l * exp(Q(omega) + R_s(omega)),
///              omega = e^{iz}
///
/// The user-given factorization is canonical; nothing is simplified across
/// factors. Construction validates and throws InvalidDensity.
class Density {
 public:
  Density(Mode mode, int gamma_power, std::vector<PolyFactor> poly_factors,
          std::map<int, cplx> exp_poly, std::vector<PrincipalPart> exp_principal);

  Mode mode() const { return mode_; }
  int gamma_power() const { return gamma_; }
  const std::vector<PolyFactor>& poly_factors() const { return poly_; }
  const std::map<int, cplx>& exp_poly() const { return exp_poly_; }
  const std::vector<PrincipalPart>& exp_principal() const { return principal_; }

  /// Degree N_q (Line). Zero for an empty or constant Q.
  int nq() const;
  /// N_q^- and N_q^+ (Cylinder). Both zero for an empty or constant Q.
  int nq_minus() const;
  int nq_plus() const;

  /// Index m of the principal part located at poly factor l, if a_l = b_m.
  std::optional<std::size_t> coinciding_principal(std::size_t l) const;

  /// The natural variable: z in Line mode, e^{iz} in Cylinder mode.
  cplx variable(cplx z) const;

  /// log rho(z) on an arbitrary branch; the real part is log|rho|.
  cplx log_value(cplx z) const;

  /// Singularity guard used by evaluate and drift: 1e-12 * (1 + |w|).
  static double guard(cplx w) { return 1e-12 * (1.0 + std::abs(w)); }

  /// Threshold on |Re(Q + R_s)| above which evaluation goes through logs.
  static constexpr double kLogSpaceThreshold = 300.0;

 private:
  void validate() const;

  Mode mode_;
  int gamma_;
  std::vector<PolyFactor> poly_;
  std::map<int, cplx> exp_poly_;
  std::vector<PrincipalPart> principal_;
};

/// rho(z). Throws SingularityTooClose near a pole or essential singularity and
/// Overflow when log|rho| exceeds the double range.
cplx evaluate(const Density& d, cplx z);

/// v(z) = rho'(z) / rho(z). Throws SingularityTooClose near any a_l or b_m.
cplx drift(const Density& d, cplx z);

/// u v(z_l + u), z_l the z-plane location of factor l; equals alpha_l at u = 0.
/// Stays accurate when u is far below the floating resolution of z_l.
cplx offset_drift(const Density& d, std::size_t l, cplx u);

/// Locations in the z-plane of a point given in the density's natural variable.
/// Cylinder mode returns the representative with Re z in [0, 2pi).
cplx to_z_plane(const Density& d, cplx w);

struct LocatedOrder {
  cplx location;  // z-plane
  int order = 0;
};

struct SingularityCensus {
  Mode mode = Mode::Line;
  std::vector<LocatedOrder> finite_zeroes;
  std::vector<LocatedOrder> poles;
  std::vector<cplx> essential_singularities;  // z-plane
  std::vector<Endpoint> generalized_zero_approaches;
  int n_closed = 0;
  int n_gamma = 0;

  // Bookkeeping of the counting formulas.
  int n_p_prime = 0;      // factors not coinciding with an essential singularity
  int n_zero_approaches = 0;
  int n_g = 0;            // Line mode: N_p' + N_q + sum(beta_m + 1)
  bool has_zeroes = false;
};

/// Zeros, poles, essential singularities, inequivalent zero approaches and the
/// number N_Gamma of independent path functionals.
SingularityCensus census(const Density& d);

/// N_Gamma from the closed-form counting formulas only (no enumeration).
int closed_form_n_gamma(const Density& d);

}  // namespace clpaths
