#pragma once

#include <complex>
#include <string>
#include <variant>

namespace clpaths {

using cplx = std::complex<double>;

/// A finite zero of the density (z-plane location).
struct FiniteZero {
  cplx z;
};

/// Line mode: the zero at infinity approached along the ray arg z = angle.
struct InfinityRay {
  double angle = 0.0;
};

/// Cylinder mode: z -> sign * i*infinity along Re z = x.
/// sign = -1 is omega -> infinity, sign = +1 is omega -> 0.
struct ImaginaryInfinity {
  int sign = -1;
  double x = 0.0;
};

/// Zero at an essential singularity b (z-plane location), reached along the
/// ray arg(z - b) = angle. The tail starts at b + radius * e^{i angle}.
struct EssentialApproach {
  cplx b;
  int sector = 0;
  double angle = 0.0;
  double radius = 0.5;
};

using Endpoint = std::variant<FiniteZero, InfinityRay, ImaginaryInfinity, EssentialApproach>;

bool is_finite(const Endpoint& e);

/// Short human-readable tag, e.g. "zero(0,1)" or "inf(0)".
std::string describe(const Endpoint& e);

}  // namespace clpaths
