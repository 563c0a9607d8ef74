#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "clpaths/density.hpp"

namespace corpus {

using clpaths::cplx;
using clpaths::Density;
using clpaths::Mode;

struct Entry {
  std::string name;
  Density density;
  int n_gamma;  // expected number of independent path functionals
};

inline Density gaussian(double beta = 0.5) { return Density(Mode::Line, 0, {}, {{2, -beta}}, {}); }

inline Density ex1() { return Density(Mode::Line, 0, {{cplx(0, 1), 2}}, {{2, -1.6}}, {}); }

// e^{-iz}
inline Density winding_exp() { return Density(Mode::Cylinder, -1, {}, {}, {}); }

// (z - a)^3 (z - b)^-2 exp(-z^4 - 1/z^2)
inline Density rational_essential(cplx a = 1.0, cplx b = 2.0) {
  return Density(Mode::Line, 0, {{a, 3}, {b, -2}}, {{4, -1.0}}, {{0.0, {0.0, -1.0}}});
}

// e^{sigma i z} exp(e^{2iz})
inline Density omega_gauss(int sigma) { return Density(Mode::Cylinder, sigma, {}, {{2, 1.0}}, {}); }

// (z - z1)(z - z2) e^{-beta z^2}
inline Density two_zero_gaussian() {
  return Density(Mode::Line, 0, {{1.0, 1}, {cplx(-1, 0.5), 1}}, {{2, -1.0}}, {});
}

// exp(-z^2/2 - n/(z - zs))
inline Density essential(int n, cplx zs) {
  return Density(Mode::Line, 0, {}, {{2, -0.5}}, {{zs, {cplx(-n)}}});
}

// (1 + 2 cos(z - i))^2 e^{0.3 cos z} up to a constant:
// omega^-2 (omega - r1)^2 (omega - r2)^2 exp(0.15 (omega + 1/omega)), r = e^{-1} e^{+-2 pi i/3}.
inline Density periodic() {
  const double s = std::exp(-1.0);
  const cplx r1 = std::polar(s, 2.0 * std::numbers::pi / 3.0), r2 = std::polar(s, -2.0 * std::numbers::pi / 3.0);
  return Density(Mode::Cylinder, -2, {{r1, 2}, {r2, 2}}, {{-1, 0.15}, {1, 0.15}}, {});
}

// prod (z - b_l)^-1
inline Density pure_poles(int n) {
  const std::vector<cplx> b{1.0, -1.0, cplx(0, 1)};
  std::vector<clpaths::PolyFactor> f;
  for (int i = 0; i < n; ++i) f.push_back({b[i], -1});
  return Density(Mode::Line, 0, f, {}, {});
}

// exp(i m x + beta cos x)
inline Density fourier_cos(int m, cplx beta) {
  return Density(Mode::Cylinder, m, {}, {{-1, beta / 2.0}, {1, beta / 2.0}}, {});
}

// (x - a) e^{-x^2/2}
inline Density shifted_zero(cplx a) { return Density(Mode::Line, 0, {{a, 1}}, {{2, -0.5}}, {}); }

// The dimension-equality corpus with the listed N_Gamma.
inline std::vector<Entry> dimension_corpus() {
  return {
      {"e^{-iz}", winding_exp(), 1},
      {"e^{iz} exp(e^{2iz})", omega_gauss(1), 2},
      {"e^{-iz} exp(e^{2iz})", omega_gauss(-1), 2},
      {"(z-1)^3 (z-2)^-2 e^{-z^4-1/z^2}", rational_essential(), 8},
      {"two-zero Gaussian", two_zero_gaussian(), 3},
      {"essential n=1 zs=1", essential(1, 1.0), 3},
      {"essential n=2 zs=i/2", essential(2, cplx(0, 0.5)), 3},
      {"periodic (1+2cos(z-i))^2 e^{0.3cos z}", periodic(), 2},
      {"pure poles N_p=1", pure_poles(1), 1},
      {"pure poles N_p=2", pure_poles(2), 2},
      {"pure poles N_p=3", pure_poles(3), 3},
      {"Gaussian", gaussian(), 1},
  };
}

}  // namespace corpus
