#include <doctest.h>

#include <cmath>
#include <random>

#include "clpaths/errors.hpp"
#include "clpaths/langevin.hpp"
#include "corpus.hpp"

using namespace clpaths;

namespace {

CLConfig small_config() {
  CLConfig c;
  c.n_walkers = 8;
  c.dt = 1e-3;
  c.t_burn = 5.0;
  c.t_measure = 100.0;
  c.meas_interval = 0.1;
  c.histogram.nx = 64;
  c.histogram.ny = 64;
  c.histogram.replicas = 4;
  return c;
}

}  // namespace

TEST_CASE("step examples") {
  CHECK(std::abs(step(1.0, -1.0, 0.01, 0.0) - 0.99) < 1e-15);
  const cplx z(0, 1);
  CHECK(std::abs(step(z, -z, 0.01, 1.0) - cplx(std::sqrt(0.02), 0.99)) < 1e-15);
  CHECK(std::abs(step(corpus::gaussian(), z, 0.01, 1.0) - cplx(std::sqrt(0.02), 0.99)) < 1e-15);
}

TEST_CASE("effective step") {
  CLConfig c;
  c.dt = 1e-3;
  c.dt_cap_factor = 0.1;
  CHECK(effective_dt(c, 1.0) == 1e-3);
  CHECK(std::abs(effective_dt(c, 100.0) - 1e-5) < 1e-20);
  c.adaptive = false;
  CHECK(effective_dt(c, 100.0) == 1e-3);
}

TEST_CASE("a real walker of a real positive density stays real") {
  const Density d = corpus::gaussian();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  cplx z = 0.3;
  for (int i = 0; i < 100000; ++i) {
    z = step(d, z, 1e-3, n(rng));
    REQUIRE(z.imag() == 0.0);
  }
  CLConfig c = small_config();
  c.start_points = {0.5, -1.0};
  c.trace_walkers = 2;
  c.trace_interval = 0.1;
  const CLResult r = run(d, {Observable::monomial(2)}, c);
  REQUIRE_FALSE(r.traces.empty());
  for (const auto& p : r.traces) CHECK(p.z.imag() == 0.0);
  CHECK(r.records[0].mean.imag() == 0.0);
}

TEST_CASE("Gaussian <x^2> = 1") {
  CLConfig c = small_config();
  c.n_walkers = 16;
  c.t_measure = 400.0;
  const CLResult r = run(corpus::gaussian(), {Observable::monomial(2)}, c);
  const auto& rec = r.records[0];
  CHECK(rec.n_samples > 0);
  CHECK(rec.err.real() > 0.0);
  CHECK(std::abs(rec.mean.real() - 1.0) < 3.0 * rec.err.real());
  CHECK(rec.tau_int > 0.0);
}

TEST_CASE("identical config and seed give bit-identical results") {
  CLConfig c = small_config();
  c.start_points = {cplx(0.2, 0.1)};
  const std::vector<Observable> obs{Observable::monomial(1), Observable::exponential(-1), Observable::exponential(2)};
  const CLResult a = run(corpus::ex1(), obs, c), b = run(corpus::ex1(), obs, c);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].mean == b.records[k].mean);
    CHECK(a.records[k].err == b.records[k].err);
    CHECK(a.records[k].tau_int == b.records[k].tau_int);
  }
  CHECK(a.histogram == b.histogram);
  CHECK(a.replicas == b.replicas);

  c.threads = 3;
  const CLResult t = run(corpus::ex1(), obs, c);
  for (std::size_t k = 0; k < a.records.size(); ++k) CHECK(a.records[k].mean == t.records[k].mean);
  CHECK(a.histogram == t.histogram);

  c.seed = 2;
  const CLResult s = run(corpus::ex1(), obs, c);
  CHECK(s.records[0].mean != a.records[0].mean);
}

TEST_CASE("replicas are clamped to the walker count") {
  CLConfig c = small_config();
  c.t_measure = 5.0;
  c.histogram.replicas = 100;
  const CLResult r = run(corpus::gaussian(), {Observable::monomial(1)}, c);
  CHECK(r.replicas.size() == static_cast<std::size_t>(c.n_walkers));
  double total = 0.0;
  for (const auto& h : r.replicas) total += h.total();
  CHECK(total == r.histogram.total());
}

TEST_CASE("higher Fourier modes are flagged as decay-unverified") {
  CLConfig c = small_config();
  c.t_measure = 10.0;
  const CLResult r =
      run(corpus::ex1(), {Observable::exponential(1), Observable::exponential(-2), Observable::monomial(4)}, c);
  CHECK_FALSE(r.records[0].decay_unverified);
  CHECK(r.records[1].decay_unverified);
  CHECK_FALSE(r.records[2].decay_unverified);
}

TEST_CASE("run errors") {
  CLConfig c = small_config();
  c.y_cap = 5.0;
  // v = -i: Im z decreases at unit rate.
  CHECK_THROWS_AS(run(corpus::winding_exp(), {Observable::exponential(1)}, c), Runaway);

  CLConfig bad = small_config();
  bad.n_walkers = 0;
  CHECK_THROWS_AS(run(corpus::gaussian(), {Observable::monomial(1)}, bad), InputError);
  bad = small_config();
  bad.histogram.nx = 30;
  CHECK_THROWS_AS(validate(bad), InputError);
  bad = small_config();
  bad.start_points = {cplx(0, 1)};
  CHECK_THROWS_AS(run(corpus::ex1(), {Observable::monomial(1)}, bad), InputError);
  CHECK_THROWS_AS(run(corpus::winding_exp(), {Observable::monomial(1)}, small_config()), InputError);
}

TEST_CASE("binning error of independent samples") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  BinningAccumulator acc;
  const int N = 1 << 16;
  for (int i = 0; i < N; ++i) acc.add(n(rng));
  CHECK(acc.count() == static_cast<std::uint64_t>(N));
  const double expected = 1.0 / std::sqrt(static_cast<double>(N));
  CHECK(std::abs(acc.naive_error() / expected - 1.0) < 0.05);
  CHECK(std::abs(acc.error() / expected - 1.0) < 0.3);
  CHECK(std::abs(acc.mean()) < 4.0 * expected);
}

TEST_CASE("binning error grows for correlated samples") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  BinningAccumulator acc;
  double x = 0.0;
  for (int i = 0; i < 1 << 16; ++i) {
    x = 0.95 * x + n(rng);
    acc.add(x);
  }
  // Ratio of blocked to naive error -> sqrt((1 + 0.95) / (1 - 0.95)) = 6.2.
  CHECK(acc.error() / acc.naive_error() > 4.5);
}

TEST_CASE("histogram accumulation, expansion and merge") {
  Histogram h(8, 8, -1.0, 1.0, -1.0, 1.0, false);
  h.add(cplx(0.1, 0.1), cplx(2.0, -1.0));
  h.add(cplx(0.1, 0.1), cplx(0.0, 1.0));
  CHECK(h.total() == 2.0);
  CHECK(h.count(4, 4) == 2.0);
  CHECK(h.sum_vx(4, 4) == 2.0);
  CHECK(h.sum_vy(4, 4) == 0.0);
  h.add(cplx(3.0, 0.0), 0.0);
  CHECK(h.x_hi() >= 3.0);
  CHECK(h.nx() == 8);
  CHECK(h.total() == 3.0);

  Histogram g(8, 8, -1.0, 1.0, -1.0, 1.0, false);
  g.add(cplx(-0.5, 0.5), 1.0);
  g.merge(h);
  CHECK(g.total() == 4.0);
  CHECK(g.x_hi() == h.x_hi());

  const Histogram copy = Histogram::from_channels(g.nx(), g.ny(), g.x_lo(), g.x_hi(), g.y_lo(), g.y_hi(),
                                                  g.periodic_x(), g.counts(), g.vx_sums(), g.vy_sums());
  CHECK(copy == g);
}

TEST_CASE("cylinder histograms wrap x") {
  Histogram h(16, 16, 0.0, 2.0 * 3.141592653589793, -1.0, 1.0, true);
  h.add(cplx(7.0, 0.0), 0.0);
  CHECK(h.x_lo() == 0.0);
  CHECK(h.total() == 1.0);
  double sum = 0.0;
  for (double c : h.counts()) sum += c;
  CHECK(sum == 1.0);
}
