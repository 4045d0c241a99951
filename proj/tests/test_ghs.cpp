// Apache License, Version 2.0, refer to LICENSE.txt
#include <cmath>
#include <vector>

#include <doctest.h>

#include "nefqvf/ghs.hpp"
#include "oracles.hpp"

using namespace nefqvf;

namespace {

std::vector<double> draw_many(std::function<double(Rng&)> draw, int count,
                              std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) v = draw(rng);
  return out;
}

}  // namespace

TEST_CASE("hyperbolic-secant base density at weight one") {
  // b(0, 1) is the sech density at the origin, exactly 1/2.
  CHECK(ghs_log_base(0.0, 1.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  // Symmetry in s.
  for (double s : {0.3, 1.7, 9.0, 44.0})
    for (double n : {0.4, 1.0, 2.0, 3.7, 11.0})
      CHECK(ghs_log_base(s, n) == doctest::Approx(ghs_log_base(-s, n)).epsilon(1e-13));
}

TEST_CASE("tilted density integrates to one across weights") {
  for (double n : {0.35, 0.6, 1.0, 2.0, 2.7, 5.5}) {
    for (double u : {0.0, 0.7, -1.3}) {
      const double total = oracle::integrate(
          [&](double s) { return std::exp(ghs_logpdf(s, u, n)); }, -INFINITY,
          INFINITY);
      CAPTURE(n);
      CAPTURE(u);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("tilted draws match the exact conditional moments") {
  // E(S|u) = n u, Var(S|u) = n (1 + u^2).
  struct Case {
    double u, n;
  };
  for (const Case c : {Case{0.8, 3.0}, Case{-0.4, 2.0}, Case{0.5, 2.5},
                       Case{0.9, 0.6}, Case{0.0, 1.0}}) {
    const auto draws = draw_many(
        [&](Rng& rng) { return sample_ghs(c.u, c.n, rng); }, 100000, 61);
    const auto m = oracle::summarize(draws);
    CAPTURE(c.u);
    CAPTURE(c.n);
    CHECK(std::abs(m.mean - c.n * c.u) < 4.0 * m.se_mean);
    CHECK(std::abs(m.var - c.n * (1.0 + c.u * c.u)) < 4.0 * m.se_var);
  }
}

TEST_CASE("integer-weight draws follow the density, not just its moments") {
  // KS against the numerically normalized tilted density.
  const double u = 0.6, n = 2.0;
  const auto draws = draw_many(
      [&](Rng& rng) { return sample_ghs(u, n, rng); }, 40000, 62);
  const double lo = -30.0, hi = 40.0;
  auto cdf = [&](double x) {
    return oracle::integrate(
        [&](double s) { return std::exp(ghs_logpdf(s, u, n)); }, lo, x);
  };
  CHECK(oracle::ks_statistic(draws, cdf) < 0.015);
}

TEST_CASE("scaled-Student normalizer makes the density integrate to one") {
  for (double n0 : {1.5, 2.0, 3.0, 6.0}) {
    for (double s0 : {0.0, 1.0, -2.5}) {
      const double total = oracle::integrate(
          [&](double y) { return std::exp(gsst_logpdf(y, s0, n0)); },
          -INFINITY, INFINITY);
      CAPTURE(n0);
      CAPTURE(s0);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("scaled-Student rejection draws: moments and distribution") {
  // E(Y) = s0/n0, Var(Y) = (1 + (s0/n0)^2)/(n0 - 1) for n0 > 1.
  struct Case {
    double s0, n0;
  };
  for (const Case c : {Case{1.2, 3.0}, Case{0.0, 2.0}, Case{-2.0, 4.0}}) {
    const auto draws = draw_many(
        [&](Rng& rng) { return sample_gsst(c.s0, c.n0, rng); }, 100000, 63);
    const auto m = oracle::summarize(draws);
    const double mean = c.s0 / c.n0;
    const double var = (1.0 + mean * mean) / (c.n0 - 1.0);
    CAPTURE(c.s0);
    CAPTURE(c.n0);
    CHECK(std::abs(m.mean - mean) < 4.0 * m.se_mean);
    CHECK(std::abs(m.var - var) < 4.0 * m.se_var);
  }
  const auto draws = draw_many(
      [&](Rng& rng) { return sample_gsst(1.2, 3.0, rng); }, 40000, 64);
  const GsstCdfTable table(1.2, 3.0);
  CHECK(oracle::ks_statistic(draws, [&](double y) { return table(y); }) <
        0.015);
}

TEST_CASE("quadrature CDF agrees with direct integration and the table") {
  const double s0 = 1.2, n0 = 3.0;
  const GsstCdfTable table(s0, n0);
  for (double y : {-3.0, -0.5, 0.0, 0.4, 1.0, 2.5, 10.0}) {
    const double direct = oracle::integrate(
        [&](double t) { return std::exp(gsst_logpdf(t, s0, n0)); }, -INFINITY,
        y);
    CHECK(gsst_cdf(y, s0, n0) == doctest::Approx(direct).epsilon(5e-6));
    CHECK(table(y) == doctest::Approx(direct).epsilon(5e-6));
  }
  CHECK(table(-1e9) == doctest::Approx(0.0));
  CHECK(table(1e9) == doctest::Approx(1.0));
}

TEST_CASE("draws are reproducible for a fixed seed") {
  Rng a = make_rng(7), b = make_rng(7);
  for (int i = 0; i < 50; ++i) {
    CHECK(sample_ghs(0.3, 2.5, a) == sample_ghs(0.3, 2.5, b));
    CHECK(sample_gsst(1.0, 2.0, a) == sample_gsst(1.0, 2.0, b));
  }
}

TEST_CASE("grid sampler reproduces a known density") {
  // Standard normal restricted to [-10, 10].
  GridSampler sampler(
      [](double x) { return -0.5 * x * x; }, -10.0, 10.0, 0.0, 1.0);
  CHECK(sampler.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sampler.cdf(1.0) ==
        doctest::Approx(oracle::normal_cdf(1.0)).epsilon(1e-5));
  CHECK(sampler.cdf(-1.96) ==
        doctest::Approx(oracle::normal_cdf(-1.96)).epsilon(1e-5));
  const auto draws = draw_many(
      [&](Rng& rng) { return sampler.draw(rng); }, 20000, 65);
  CHECK(oracle::ks_statistic(
            draws, [](double x) { return oracle::normal_cdf(x); }) < 0.015);
}
