#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "clpaths/contour.hpp"
#include "clpaths/density.hpp"
#include "clpaths/errors.hpp"
#include "corpus.hpp"

using namespace clpaths;

namespace {

constexpr double kPi = std::numbers::pi;

PathSpec gamma_plus() { return PathSpec::open(FiniteZero{cplx(0, 1)}, InfinityRay{0.0}, {}, "T+"); }
PathSpec gamma_minus() { return PathSpec::open(FiniteZero{cplx(0, 1)}, InfinityRay{kPi}, {}, "T-"); }
PathSpec real_line() { return PathSpec::open(InfinityRay{kPi}, InfinityRay{0.0}, {}, "Trho"); }

std::vector<Observable> ex1_observables() {
  return {Observable::monomial(1),    Observable::monomial(2),    Observable::monomial(3),
          Observable::monomial(4),    Observable::exponential(-1), Observable::exponential(1),
          Observable::exponential(-2), Observable::exponential(2)};
}

std::vector<Observable> admitted(Mode mode) {
  std::vector<Observable> out;
  if (mode == Mode::Line)
    for (int m = 0; m <= 4; ++m) out.push_back(Observable::monomial(m));
  for (int k = -2; k <= 2; ++k) out.push_back(Observable::exponential(k));
  return out;
}

}  // namespace

TEST_CASE("observable labels round-trip") {
  for (const auto& o : {Observable::monomial(0), Observable::monomial(3), Observable::exponential(-2),
                        Observable::exponential(1), Observable::drift(), Observable::monomial(2).sd_image()})
    CHECK(Observable::parse(o.label()) == o);
  CHECK_THROWS_AS(Observable::parse("sin(x)"), InputError);
  CHECK_FALSE(Observable::monomial(1).admitted(Mode::Cylinder));
  CHECK(Observable::exponential(1).admitted(Mode::Cylinder));
}

TEST_CASE("spanning paths of ex1 are the two rays from i") {
  const auto paths = spanning_paths(census(corpus::ex1()));
  REQUIRE(paths.size() == 2);
  std::set<long> directions;
  for (const auto& p : paths) {
    CHECK(p.kind == PathSpec::Kind::Open);
    const bool from_zero = std::holds_alternative<FiniteZero>(*p.start);
    const Endpoint& zero = from_zero ? *p.start : *p.end;
    const Endpoint& inf = from_zero ? *p.end : *p.start;
    REQUIRE(std::holds_alternative<FiniteZero>(zero));
    CHECK(std::abs(std::get<FiniteZero>(zero).z - cplx(0, 1)) < 1e-12);
    REQUIRE(std::holds_alternative<InfinityRay>(inf));
    directions.insert(std::lround(std::cos(std::get<InfinityRay>(inf).angle)));
  }
  CHECK(directions == std::set<long>{-1, 1});
}

TEST_CASE("spanning paths of e^{-iz} and the Gaussian") {
  const auto w = spanning_paths(census(corpus::winding_exp()));
  REQUIRE(w.size() == 1);
  CHECK(w[0].kind == PathSpec::Kind::Closed);
  CHECK(std::abs(w[0].winding) == 1);

  const auto g = spanning_paths(census(Density(Mode::Line, 0, {}, {{2, -1.0}}, {})));
  REQUIRE(g.size() == 1);
  REQUIRE(std::holds_alternative<InfinityRay>(*g[0].start));
  REQUIRE(std::holds_alternative<InfinityRay>(*g[0].end));
  CHECK(std::abs(std::abs(std::get<InfinityRay>(*g[0].start).angle - std::get<InfinityRay>(*g[0].end).angle) - kPi) <
        1e-12);
}

TEST_CASE("spanning paths match the census count on the corpus") {
  for (const auto& e : corpus::dimension_corpus()) {
    CAPTURE(e.name);
    const auto c = census(e.density);
    CHECK(static_cast<int>(spanning_paths(c).size()) == c.n_gamma);
  }
}

TEST_CASE("integrate examples") {
  const Density d = corpus::ex1();
  const Observable one = Observable::monomial(0);
  const cplx tp = integrate(d, gamma_plus(), one), tm = integrate(d, gamma_minus(), one);
  CHECK(std::abs(tp - cplx(-0.4817, -0.2228)) < 1e-4);
  CHECK(std::abs(tm - cplx(0.4817, -0.2228)) < 1e-4);

  const Density pole = corpus::pure_poles(1);
  const auto loop = PathSpec::closed({cplx(2, 0), cplx(1, 1), cplx(0, 0), cplx(1, -1)}, 0, {}, "loop");
  CHECK(std::abs(integrate(pole, loop, one) - cplx(0, 2.0 * kPi)) < 1e-10);

  const Density g(Mode::Line, 0, {}, {{2, -1.6}}, {});
  const cplx gi = integrate(g, real_line(), one);
  CHECK(std::abs(gi - std::sqrt(kPi / 1.6)) < 1e-10);

  const cplx x = integrate(d, gamma_plus(), Observable::monomial(1)) / tp;
  CHECK(std::abs(x - cplx(0.7521, 0.5613)) < 1e-4);
  const cplx e = integrate(d, gamma_plus(), Observable::exponential(-1)) / tp;
  CHECK(std::abs(e - cplx(1.2626, -1.0634)) < 1e-4);
}

TEST_CASE("integrate errors") {
  const Density growing(Mode::Line, 0, {}, {{2, 0.5}}, {});
  CHECK_THROWS_AS(integrate(growing, real_line(), Observable::monomial(0)), NoDecay);
  const auto through_pole = PathSpec::closed({cplx(2, 0), cplx(1, 0), cplx(0, 0), cplx(1, -1)}, 0, {}, "bad");
  CHECK_THROWS_AS(integrate(corpus::pure_poles(1), through_pole, Observable::monomial(0)), SingularityTooClose);
  CHECK_THROWS_AS(integrate(corpus::winding_exp(), spanning_paths(census(corpus::winding_exp()))[0], Observable::monomial(1)),
                  InputError);
}

TEST_CASE("functional table") {
  const Density d = corpus::ex1();
  const auto t = functional_table(d, {gamma_plus(), gamma_minus(), real_line()}, ex1_observables(), {}, true);
  REQUIRE(t.all_ok());
  CHECK(std::abs(t.values[2][0] - cplx(0, 0.9091)) < 1e-4);
  CHECK(std::abs(t.values[0][0] - cplx(0.7521, 0.5613)) < 1e-4);
  CHECK(std::abs(t.values[1][0] - cplx(-0.7521, 0.5613)) < 1e-4);

  const auto ones = functional_table(d, {gamma_plus(), gamma_minus(), real_line()}, {Observable::monomial(0)}, {}, true);
  for (const auto& row : ones.values) CHECK(std::abs(row[0] - 1.0) < 1e-12);

  const Density growing(Mode::Line, 0, {}, {{2, 0.5}}, {});
  const auto failed = functional_table(growing, {real_line()}, {Observable::monomial(1)});
  CHECK_FALSE(failed.all_ok());
  CHECK_FALSE(failed.failures[0][0].empty());
}

TEST_CASE("winding path of e^{-iz}: (T, e^{ikz}) = 2 pi delta_{k,1}") {
  const Density d = corpus::winding_exp();
  const auto w = spanning_paths(census(d))[0];
  for (int k = -3; k <= 3; ++k) {
    const cplx v = integrate(d, w, Observable::exponential(k));
    CHECK(std::abs(v - (k == 1 ? cplx(2.0 * kPi * w.winding) : cplx(0.0))) < 1e-9);
  }
}

TEST_CASE("path deformation invariance") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  struct Case {
    Density d;
    PathSpec p;
  };
  const std::vector<Case> cases{
      {corpus::ex1(), PathSpec::open(FiniteZero{cplx(0, 1)}, InfinityRay{0.0}, {cplx(1, 0.5), cplx(2, 0.2)}, "a")},
      {corpus::ex1(), PathSpec::open(InfinityRay{kPi}, InfinityRay{0.0}, {cplx(-1, 0.3), cplx(1, -0.3)}, "b")},
      {corpus::two_zero_gaussian(), PathSpec::open(FiniteZero{1.0}, FiniteZero{cplx(-1, 0.5)}, {cplx(0, -0.6)}, "c")},
      {corpus::pure_poles(3),
       PathSpec::closed({cplx(2, -1), cplx(2, 2), cplx(-2, 2), cplx(-2, -1)}, 0, {}, "d")},
      {corpus::periodic(), PathSpec::closed({cplx(0, 0), cplx(2, 0.3), cplx(4, -0.3)}, 1, {}, "e")},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto obs = admitted(c.d.mode());
    for (int trial = 0; trial < 5; ++trial) {
      PathSpec q = c.p;
      for (auto& w : q.waypoints) w += cplx(u(rng), u(rng));
      for (const auto& f : obs) {
        const IntegralResult a = integrate_detailed(c.d, c.p, f), b = integrate_detailed(c.d, q, f);
        worst = std::max(worst, std::abs(a.value - b.value) / std::max(std::abs(a.value), a.l1));
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("spanning paths annihilate the Schwinger-Dyson images") {
  for (const auto& e : corpus::dimension_corpus()) {
    CAPTURE(e.name);
    for (const auto& p : spanning_paths(census(e.density)))
      for (const auto& f : admitted(e.density.mode())) {
        const IntegralResult r = integrate_detailed(e.density, p, f.sd_image());
        CHECK(std::abs(r.value) <= 1e-8 * std::max(1.0, r.l1));
      }
  }
}

TEST_CASE("contractible closed paths integrate to zero") {
  const std::vector<std::pair<Density, std::vector<cplx>>> cases{
      {corpus::ex1(), {cplx(1, -1), cplx(2, 0), cplx(1, 0.5)}},
      {corpus::rational_essential(), {cplx(-1, -1), cplx(-0.5, -1), cplx(-0.5, -0.5)}},
      {corpus::pure_poles(3), {cplx(3, 3), cplx(4, 3), cplx(4, 4)}},
      {corpus::periodic(), {cplx(0, -1), cplx(1, -1), cplx(0.5, 0)}},
      {corpus::essential(1, 1.0), {cplx(-1, 0), cplx(0, 0.5), cplx(0, -0.5)}},
  };
  for (const auto& [d, pts] : cases)
    for (const auto& f : admitted(d.mode()))
      CHECK(std::abs(integrate(d, PathSpec::closed(pts, 0, {}, "loop"), f)) < 1e-10);
}
