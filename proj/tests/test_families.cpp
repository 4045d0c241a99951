// Apache License, Version 2.0, refer to LICENSE.txt
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "nefqvf/families.hpp"
#include "oracles.hpp"

using namespace nefqvf;

namespace {

struct Point {
  FamilyKind kind;
  double s0, n0;  // valid conjugate parameters used across the suite
  double u;       // an interior mean-domain point
};

const std::vector<Point>& canonical_points() {
  static const std::vector<Point> pts = {
      {FamilyKind::NormalNormal, 0.0, 1.0, 0.4},
      {FamilyKind::GammaPoisson, 2.0, 4.0, 1.3},
      {FamilyKind::InvGammaGamma, 3.0, 2.0, 0.8},
      {FamilyKind::BetaBinomial, 1.0, 2.0, 0.37},
      {FamilyKind::InvBetaNegBinomial, 1.5, 2.0, 0.9},
      {FamilyKind::GsstGhs, 1.0, 2.5, 0.5},
  };
  return pts;
}

}  // namespace

TEST_CASE("variance coefficient table") {
  auto expect = [](FamilyKind k, double a, double b, double c) {
    const QvfCoefficients v = qvf_coefficients(k);
    CHECK(v.nu0 == a);
    CHECK(v.nu1 == b);
    CHECK(v.nu2 == c);
  };
  expect(FamilyKind::NormalNormal, 1, 0, 0);
  expect(FamilyKind::GammaPoisson, 0, 1, 0);
  expect(FamilyKind::InvGammaGamma, 0, 0, 1);
  expect(FamilyKind::BetaBinomial, 0, 1, -1);
  expect(FamilyKind::InvBetaNegBinomial, 0, 1, 1);
  expect(FamilyKind::GsstGhs, 1, 0, 1);
}

TEST_CASE("variance function values and domain errors") {
  CHECK(variance_function(FamilyKind::GammaPoisson, 2.0) == 2.0);
  CHECK(variance_function(FamilyKind::BetaBinomial, 0.5) == 0.25);
  CHECK(variance_function(FamilyKind::NormalNormal, -7.3) == 1.0);
  CHECK_THROWS_AS((void)variance_function(FamilyKind::GammaPoisson, -1.0),
                  std::domain_error);
  CHECK_THROWS_AS((void)variance_function(FamilyKind::BetaBinomial, 1.2),
                  std::domain_error);
  CHECK_THROWS_AS((void)variance_function(FamilyKind::InvGammaGamma, 0.0),
                  std::domain_error);
}

TEST_CASE("canonical triplets at reference points") {
  const CanonicalTriplet gp = canonical_triplet(FamilyKind::GammaPoisson, 1.0);
  CHECK(gp.theta == doctest::Approx(0.0));
  CHECK(gp.cumulant == doctest::Approx(1.0));
  CHECK(gp.log_jacobian == doctest::Approx(0.0));

  const CanonicalTriplet bb = canonical_triplet(FamilyKind::BetaBinomial, 0.5);
  CHECK(bb.theta == doctest::Approx(0.0));
  CHECK(bb.cumulant == doctest::Approx(std::log(2.0)));
  CHECK(bb.log_jacobian == doctest::Approx(std::log(4.0)));

  const CanonicalTriplet gs = canonical_triplet(FamilyKind::GsstGhs, 0.0);
  CHECK(gs.theta == doctest::Approx(0.0));
  CHECK(gs.cumulant == doctest::Approx(0.0));
  CHECK(gs.log_jacobian == doctest::Approx(0.0));
}

TEST_CASE("mean parametrization is consistent with the cumulant") {
  // d M / d theta = u and d u / d theta = V(u), checked by central
  // differences through the mean parametrization; also log|D| = -log V(u).
  for (const auto& p : canonical_points()) {
    const double h = 1e-5;
    auto theta = [&](double u) { return canonical_triplet(p.kind, u).theta; };
    auto cumulant = [&](double u) {
      return canonical_triplet(p.kind, u).cumulant;
    };
    const double dtheta = oracle::fd1(theta, p.u, h);
    const double dM = oracle::fd1(cumulant, p.u, h);
    INFO("family " << family_name(p.kind));
    CHECK(dM / dtheta == doctest::Approx(p.u).epsilon(1e-6));
    CHECK(1.0 / dtheta ==
          doctest::Approx(variance_function(p.kind, p.u)).epsilon(1e-6));
    CHECK(canonical_triplet(p.kind, p.u).log_jacobian ==
          doctest::Approx(-std::log(variance_function(p.kind, p.u)))
              .epsilon(1e-12));
  }
}

TEST_CASE("names round-trip and reject unknowns") {
  for (FamilyKind k : all_families)
    CHECK(family_from_name(family_name(k)) == k);
  CHECK_THROWS_AS((void)family_from_name("cauchy"), std::invalid_argument);
}

TEST_CASE("only the binomial-trial family demands integer weights") {
  CHECK(requires_integer_weights(FamilyKind::BetaBinomial));
  for (FamilyKind k : all_families)
    if (k != FamilyKind::BetaBinomial) CHECK(!requires_integer_weights(k));
}

TEST_CASE("conjugate parameter validation") {
  for (const auto& p : canonical_points())
    CHECK_NOTHROW(check_conjugate_params(p.kind, p.s0, p.n0));
  // s0/n0 outside the mean domain or precision at/below nu2.
  CHECK_THROWS_AS(check_conjugate_params(FamilyKind::BetaBinomial, 3.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_conjugate_params(FamilyKind::GammaPoisson, -1.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_conjugate_params(FamilyKind::InvGammaGamma, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_conjugate_params(FamilyKind::GsstGhs, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_conjugate_params(FamilyKind::NormalNormal, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(FamilySpec(FamilyKind::BetaBinomial, 0.0, 2.0),
                  std::invalid_argument);
}

TEST_CASE("frozen log-density values") {
  // Poisson(1) at 0, Gamma(1, rate 1) at 1, sech density at 0.
  CHECK(latent_logpdf(FamilyKind::GammaPoisson, 0.0, 1.0, 1.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(latent_logpdf(FamilyKind::InvGammaGamma, 1.0, 1.0, 1.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(latent_logpdf(FamilyKind::GsstGhs, 0.0, 0.0, 1.0) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  // IGa(2,1) at 1 = e^{-1}; Be(1,1) is uniform; standard normal at 0.
  CHECK(conjugate_logpdf(FamilyKind::InvGammaGamma, 1.0, 1.0, 1.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(conjugate_logpdf(FamilyKind::BetaBinomial, 0.5, 1.0, 2.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(conjugate_logpdf(FamilyKind::NormalNormal, 0.0, 0.0, 1.0) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("off-support points return negative infinity") {
  CHECK(latent_logpdf(FamilyKind::GammaPoisson, 1.5, 1.0, 1.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(latent_logpdf(FamilyKind::InvGammaGamma, -1.0, 1.0, 1.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(latent_logpdf(FamilyKind::BetaBinomial, 5.0, 0.5, 3.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(conjugate_logpdf(FamilyKind::InvGammaGamma, -2.0, 1.0, 1.0) ==
        -std::numeric_limits<double>::infinity());
  CHECK(conjugate_logpdf(FamilyKind::BetaBinomial, 1.5, 1.0, 2.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("conjugate densities are normalized") {
  for (const auto& p : canonical_points()) {
    auto pdf = [&](double y) {
      const double lp = conjugate_logpdf(p.kind, y, p.s0, p.n0);
      return std::isfinite(lp) ? std::exp(lp) : 0.0;
    };
    double lo = -INFINITY, hi = INFINITY;
    switch (p.kind) {
      case FamilyKind::GammaPoisson:
      case FamilyKind::InvGammaGamma:
      case FamilyKind::InvBetaNegBinomial:
        lo = 0.0;
        break;
      case FamilyKind::BetaBinomial:
        lo = 0.0;
        hi = 1.0;
        break;
      default:
        break;
    }
    INFO("family " << family_name(p.kind));
    CHECK(oracle::integrate(pdf, lo, hi) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("latent densities are normalized (sums for counting families)") {
  for (const auto& p : canonical_points()) {
    const double n = requires_integer_weights(p.kind) ? 3.0 : 2.5;
    INFO("family " << family_name(p.kind));
    if (p.kind == FamilyKind::GammaPoisson ||
        p.kind == FamilyKind::BetaBinomial ||
        p.kind == FamilyKind::InvBetaNegBinomial) {
      double total = 0.0;
      for (int s = 0; s < 400; ++s) {
        const double lp = latent_logpdf(p.kind, s, p.u, n);
        if (std::isfinite(lp)) total += std::exp(lp);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
    } else {
      auto pdf = [&](double s) {
        const double lp = latent_logpdf(p.kind, s, p.u, n);
        return std::isfinite(lp) ? std::exp(lp) : 0.0;
      };
      const double lo =
          p.kind == FamilyKind::InvGammaGamma ? 0.0 : -INFINITY;
      CHECK(oracle::integrate(pdf, lo, INFINITY) ==
            doctest::Approx(1.0).epsilon(1e-4));
    }
  }
}

TEST_CASE("latent draws hit the exact conditional moments") {
  // E(S|u) = n u, Var(S|u) = n V(u).
  for (const auto& p : canonical_points()) {
    const double n = requires_integer_weights(p.kind) ? 3.0 : 2.5;
    Rng rng = make_rng(17);
    std::vector<double> draws(100000);
    for (auto& v : draws) v = sample_latent(p.kind, p.u, n, rng);
    const auto m = oracle::summarize(draws);
    INFO("family " << family_name(p.kind));
    CHECK(std::abs(m.mean - n * p.u) < 4.0 * m.se_mean);
    CHECK(std::abs(m.var - n * variance_function(p.kind, p.u)) <
          4.0 * m.se_var);
  }
}

TEST_CASE("degenerate boundary weights for discrete-trial draws") {
  Rng rng = make_rng(5);
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_latent(FamilyKind::BetaBinomial, 0.0, 4.0, rng) == 0.0);
    CHECK(sample_latent(FamilyKind::BetaBinomial, 1.0, 4.0, rng) == 4.0);
    CHECK(sample_latent(FamilyKind::GammaPoisson, 0.0, 3.0, rng) == 0.0);
  }
  CHECK_THROWS_AS(
      (void)sample_latent(FamilyKind::BetaBinomial, 0.5, 2.5, rng),
      std::invalid_argument);
}

TEST_CASE("marginal draws match the conjugate moments") {
  // E(U) = s0/n0 and Var(U) = V(s0/n0)/(n0 - nu2).
  for (const auto& p : canonical_points()) {
    const FamilySpec spec(p.kind, p.s0, p.n0);
    Rng rng = make_rng(19);
    std::vector<double> draws(100000);
    for (auto& v : draws) v = sample_marginal(spec, rng);
    const auto m = oracle::summarize(draws);
    const double mean = p.s0 / p.n0;
    const double var = variance_function(p.kind, mean) /
                       (p.n0 - qvf_coefficients(p.kind).nu2);
    INFO("family " << family_name(p.kind));
    CHECK(std::abs(m.mean - mean) < 4.0 * m.se_mean);
    CHECK(std::abs(m.var - var) < 4.0 * m.se_var);
  }
}

TEST_CASE("marginal draws follow the exact distributions") {
  // KS against reference CDFs computed from incomplete gamma/beta functions.
  auto run = [](FamilyKind kind, double s0, double n0,
                const std::function<double(double)>& cdf) {
    const FamilySpec spec(kind, s0, n0);
    Rng rng = make_rng(23);
    std::vector<double> draws(40000);
    for (auto& v : draws) v = sample_marginal(spec, rng);
    INFO("family " << family_name(kind));
    CHECK(oracle::ks_statistic(draws, cdf) < 0.012);
  };
  run(FamilyKind::NormalNormal, 1.0, 4.0, [](double y) {
    return oracle::normal_cdf((y - 0.25) * 2.0);  // N(1/4, 1/4)
  });
  run(FamilyKind::GammaPoisson, 2.0, 4.0,
      [](double y) { return oracle::gamma_cdf(y, 2.0, 4.0); });
  run(FamilyKind::InvGammaGamma, 3.0, 2.0,
      [](double y) { return oracle::inv_gamma_cdf(y, 3.0, 3.0); });
  run(FamilyKind::BetaBinomial, 1.0, 3.0,
      [](double y) { return oracle::beta_cdf(y, 1.0, 2.0); });
  run(FamilyKind::InvBetaNegBinomial, 1.5, 2.0,
      [](double y) { return oracle::inv_beta_cdf(y, 1.5, 3.0); });
}

TEST_CASE("conjugate sampling accepts any valid updated parameters") {
  // Moments at a non-marginal (s*, n*) point for a couple of families.
  Rng rng = make_rng(29);
  std::vector<double> draws(50000);
  for (auto& v : draws)
    v = sample_conjugate(FamilyKind::GammaPoisson, 5.0, 2.0, rng);
  auto m = oracle::summarize(draws);
  CHECK(std::abs(m.mean - 2.5) < 4.0 * m.se_mean);          // Ga(5,2) mean
  CHECK(std::abs(m.var - 1.25) < 4.0 * m.se_var);           // Ga(5,2) var
  for (auto& v : draws)
    v = sample_conjugate(FamilyKind::InvGammaGamma, 8.0, 3.0, rng);
  m = oracle::summarize(draws);
  CHECK(std::abs(m.mean - 8.0 / 3.0) < 4.0 * m.se_mean);    // IGa(4,8) mean
}

TEST_CASE("exact conjugate CDFs match quadrature of the log densities") {
  for (const auto& p : canonical_points()) {
    double lo;
    switch (p.kind) {
      case FamilyKind::NormalNormal:
      case FamilyKind::GsstGhs:
        lo = -INFINITY;
        break;
      default:
        lo = 0.0;
        break;
    }
    const double mean = p.s0 / p.n0;
    for (double y : {mean * 0.5 + 0.01, mean, mean * 1.5}) {
      const double direct = oracle::integrate(
          [&](double t) {
            const double lp = conjugate_logpdf(p.kind, t, p.s0, p.n0);
            return std::isfinite(lp) ? std::exp(lp) : 0.0;
          },
          lo, y);
      INFO("family " << family_name(p.kind));
      CAPTURE(y);
      CHECK(conjugate_cdf(p.kind, y, p.s0, p.n0) ==
            doctest::Approx(direct).epsilon(2e-5));
    }
  }
}

TEST_CASE("family specs serialize to JSON and back") {
  for (const auto& p : canonical_points()) {
    const FamilySpec spec(p.kind, p.s0, p.n0);
    nlohmann::json j;
    to_json(j, spec);
    CHECK(j.at("family").get<std::string>() == family_name(p.kind));
    const FamilySpec back = family_spec_from_json(j);
    CHECK(back.kind() == spec.kind());
    CHECK(back.s0() == spec.s0());
    CHECK(back.n0() == spec.n0());
  }
  CHECK_THROWS(family_spec_from_json(nlohmann::json{{"family", "nope"}}));
}
