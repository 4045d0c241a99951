// Apache License, Version 2.0, refer to LICENSE.txt
#include "nefqvf/families.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "nefqvf/ghs.hpp"

namespace nefqvf {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::NormalNormal: return "normal-normal";
    case FamilyKind::GammaPoisson: return "gamma-poisson";
    case FamilyKind::InvGammaGamma: return "invgamma-gamma";
    case FamilyKind::BetaBinomial: return "beta-binomial";
    case FamilyKind::InvBetaNegBinomial: return "invbeta-negbinomial";
    case FamilyKind::GsstGhs: return "gsst-ghs";
  }
  throw std::invalid_argument("family_name: unknown kind");
}

FamilyKind family_from_name(const std::string& name) {
  for (FamilyKind k : all_families)
    if (name == family_name(k)) return k;
  throw std::invalid_argument("unknown family name: " + name);
}

QvfCoefficients qvf_coefficients(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::NormalNormal: return {1.0, 0.0, 0.0};
    case FamilyKind::GammaPoisson: return {0.0, 1.0, 0.0};
    case FamilyKind::InvGammaGamma: return {0.0, 0.0, 1.0};
    case FamilyKind::BetaBinomial: return {0.0, 1.0, -1.0};
    case FamilyKind::InvBetaNegBinomial: return {0.0, 1.0, 1.0};
    case FamilyKind::GsstGhs: return {1.0, 0.0, 1.0};
  }
  throw std::invalid_argument("qvf_coefficients: unknown kind");
}

bool in_mean_domain(FamilyKind kind, double u) {
  if (!std::isfinite(u)) return false;
  switch (kind) {
    case FamilyKind::NormalNormal:
    case FamilyKind::GsstGhs: return true;
    case FamilyKind::GammaPoisson:
    case FamilyKind::InvGammaGamma:
    case FamilyKind::InvBetaNegBinomial: return u > 0.0;
    case FamilyKind::BetaBinomial: return u > 0.0 && u < 1.0;
  }
  return false;
}

double variance_function(FamilyKind kind, double mu) {
  if (!in_mean_domain(kind, mu))
    throw std::domain_error("variance_function: mean outside domain");
  const QvfCoefficients c = qvf_coefficients(kind);
  return c.nu0 + c.nu1 * mu + c.nu2 * mu * mu;
}

CanonicalTriplet canonical_triplet(FamilyKind kind, double u) {
  if (!in_mean_domain(kind, u))
    throw std::domain_error("canonical_triplet: mean outside domain");
  CanonicalTriplet t{};
  switch (kind) {
    case FamilyKind::NormalNormal:
      t = {u, 0.5 * u * u, 0.0};
      break;
    case FamilyKind::GammaPoisson:
      t = {std::log(u), u, -std::log(u)};
      break;
    case FamilyKind::InvGammaGamma:
      t = {-1.0 / u, std::log(u), -2.0 * std::log(u)};
      break;
    case FamilyKind::BetaBinomial:
      t = {std::log(u) - std::log1p(-u), -std::log1p(-u),
           -std::log(u) - std::log1p(-u)};
      break;
    case FamilyKind::InvBetaNegBinomial:
      t = {std::log(u) - std::log1p(u), std::log1p(u),
           -std::log(u) - std::log1p(u)};
      break;
    case FamilyKind::GsstGhs:
      t = {std::atan(u), 0.5 * std::log1p(u * u), -std::log1p(u * u)};
      break;
  }
  return t;
}

bool requires_integer_weights(FamilyKind kind) {
  return kind == FamilyKind::BetaBinomial;
}

void check_conjugate_params(FamilyKind kind, double s0, double n0) {
  if (!std::isfinite(s0) || !std::isfinite(n0))
    throw std::invalid_argument("conjugate parameters must be finite");
  const double nu2 = qvf_coefficients(kind).nu2;
  if (!(n0 > 0.0) || !(n0 > nu2))
    throw std::invalid_argument("n0 must exceed max(0, nu2)");
  switch (kind) {
    case FamilyKind::NormalNormal:
    case FamilyKind::GsstGhs:
      break;
    case FamilyKind::GammaPoisson:
    case FamilyKind::InvGammaGamma:
    case FamilyKind::InvBetaNegBinomial:
      if (!(s0 > 0.0)) throw std::invalid_argument("s0 must be > 0");
      break;
    case FamilyKind::BetaBinomial:
      if (!(s0 > 0.0 && s0 < n0))
        throw std::invalid_argument("beta-binomial needs 0 < s0 < n0");
      break;
  }
  if (!in_mean_domain(kind, s0 / n0))
    throw std::invalid_argument("s0/n0 outside the mean domain");
}

namespace {

// Weaker check for density evaluation: the conjugate density is proper for
// any n > 0 (plus support constraints); n > nu2 is only needed for a finite
// variance and is enforced by FamilySpec, not here.
void check_density_params(FamilyKind kind, double s, double n) {
  if (!std::isfinite(s) || !std::isfinite(n) || !(n > 0.0))
    throw std::invalid_argument("conjugate density needs finite params, n > 0");
  switch (kind) {
    case FamilyKind::NormalNormal:
    case FamilyKind::GsstGhs:
      break;
    case FamilyKind::GammaPoisson:
    case FamilyKind::InvGammaGamma:
    case FamilyKind::InvBetaNegBinomial:
      if (!(s > 0.0)) throw std::invalid_argument("s must be > 0");
      break;
    case FamilyKind::BetaBinomial:
      if (!(s > 0.0 && s < n))
        throw std::invalid_argument("beta-binomial needs 0 < s < n");
      break;
  }
}

}  // namespace

FamilySpec::FamilySpec(FamilyKind kind, double s0, double n0)
    : kind_(kind), params_{s0, n0} {
  check_conjugate_params(kind, s0, n0);
}

void to_json(nlohmann::json& j, const FamilySpec& spec) {
  j = nlohmann::json{{"family", family_name(spec.kind())},
                     {"s0", spec.s0()},
                     {"n0", spec.n0()}};
}

FamilySpec family_spec_from_json(const nlohmann::json& j) {
  return FamilySpec(family_from_name(j.at("family").get<std::string>()),
                    j.at("s0").get<double>(), j.at("n0").get<double>());
}

double sample_conjugate(FamilyKind kind, double s_star, double n_star, Rng& rng) {
  check_density_params(kind, s_star, n_star);
  switch (kind) {
    case FamilyKind::NormalNormal: {
      std::normal_distribution<double> d(s_star / n_star, 1.0 / std::sqrt(n_star));
      return d(rng);
    }
    case FamilyKind::GammaPoisson: {
      std::gamma_distribution<double> d(s_star, 1.0 / n_star);
      return d(rng);
    }
    case FamilyKind::InvGammaGamma: {
      std::gamma_distribution<double> d(n_star + 1.0, 1.0);
      return s_star / d(rng);
    }
    case FamilyKind::BetaBinomial: {
      std::gamma_distribution<double> g1(s_star, 1.0), g2(n_star - s_star, 1.0);
      const double a = g1(rng), b = g2(rng);
      return a / (a + b);
    }
    case FamilyKind::InvBetaNegBinomial: {
      std::gamma_distribution<double> g1(s_star, 1.0), g2(n_star + 1.0, 1.0);
      return g1(rng) / g2(rng);
    }
    case FamilyKind::GsstGhs:
      return sample_gsst(s_star, n_star, rng);
  }
  throw std::invalid_argument("sample_conjugate: unknown kind");
}

double sample_marginal(const FamilySpec& spec, Rng& rng) {
  return sample_conjugate(spec.kind(), spec.s0(), spec.n0(), rng);
}

double sample_latent(FamilyKind kind, double u, double n, Rng& rng) {
  if (!(n > 0.0)) throw std::invalid_argument("sample_latent: n must be > 0");
  if (requires_integer_weights(kind) && !is_integer(n))
    throw std::invalid_argument("sample_latent: integer weight required");
  // Boundary means give the degenerate limit (e.g. Bin(n, 0) == 0).
  switch (kind) {
    case FamilyKind::NormalNormal: {
      if (!in_mean_domain(kind, u))
        throw std::domain_error("sample_latent: mean outside domain");
      std::normal_distribution<double> d(n * u, std::sqrt(n));
      return d(rng);
    }
    case FamilyKind::GammaPoisson: {
      if (u == 0.0) return 0.0;
      if (!in_mean_domain(kind, u))
        throw std::domain_error("sample_latent: mean outside domain");
      std::poisson_distribution<long> d(n * u);
      return static_cast<double>(d(rng));
    }
    case FamilyKind::InvGammaGamma: {
      if (u == 0.0) return 0.0;
      if (!in_mean_domain(kind, u))
        throw std::domain_error("sample_latent: mean outside domain");
      std::gamma_distribution<double> d(n, u);
      return d(rng);
    }
    case FamilyKind::BetaBinomial: {
      if (u == 0.0) return 0.0;
      if (u == 1.0) return n;
      if (!in_mean_domain(kind, u))
        throw std::domain_error("sample_latent: mean outside domain");
      std::binomial_distribution<long> d(static_cast<long>(std::llround(n)), u);
      return static_cast<double>(d(rng));
    }
    case FamilyKind::InvBetaNegBinomial: {
      if (u == 0.0) return 0.0;
      if (!in_mean_domain(kind, u))
        throw std::domain_error("sample_latent: mean outside domain");
      // NB(n, u/(1+u)) as a Poisson mixed over Ga(n, scale u); valid for
      // real n > 0.
      std::gamma_distribution<double> g(n, u);
      std::poisson_distribution<long> d(g(rng));
      return static_cast<double>(d(rng));
    }
    case FamilyKind::GsstGhs: {
      if (!in_mean_domain(kind, u))
        throw std::domain_error("sample_latent: mean outside domain");
      return sample_ghs(u, n, rng);
    }
  }
  throw std::invalid_argument("sample_latent: unknown kind");
}

double latent_logpdf(FamilyKind kind, double s, double u, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("latent_logpdf: n must be > 0");
  if (!in_mean_domain(kind, u))
    throw std::domain_error("latent_logpdf: mean outside domain");
  if (requires_integer_weights(kind) && !is_integer(n))
    throw std::invalid_argument("latent_logpdf: integer weight required");
  switch (kind) {
    case FamilyKind::NormalNormal:
      return -0.5 * std::log(2.0 * std::numbers::pi * n) -
             (s - n * u) * (s - n * u) / (2.0 * n);
    case FamilyKind::GammaPoisson: {
      if (s < 0.0 || !is_integer(s)) return neg_inf;
      const double k = std::round(s);
      return k * std::log(n * u) - n * u - std::lgamma(k + 1.0);
    }
    case FamilyKind::InvGammaGamma:
      if (s <= 0.0) return neg_inf;
      return (n - 1.0) * std::log(s) - s / u - n * std::log(u) - std::lgamma(n);
    case FamilyKind::BetaBinomial: {
      if (s < 0.0 || s > n || !is_integer(s)) return neg_inf;
      const double k = std::round(s);
      return log_binom(n, k) + k * std::log(u) + (n - k) * std::log1p(-u);
    }
    case FamilyKind::InvBetaNegBinomial: {
      if (s < 0.0 || !is_integer(s)) return neg_inf;
      const double k = std::round(s);
      return std::lgamma(k + n) - std::lgamma(n) - std::lgamma(k + 1.0) +
             k * (std::log(u) - std::log1p(u)) - n * std::log1p(u);
    }
    case FamilyKind::GsstGhs:
      return ghs_logpdf(s, u, n);
  }
  throw std::invalid_argument("latent_logpdf: unknown kind");
}

double conjugate_logpdf(FamilyKind kind, double y, double s_star, double n_star) {
  check_density_params(kind, s_star, n_star);
  switch (kind) {
    case FamilyKind::NormalNormal: {
      const double d = y - s_star / n_star;
      return 0.5 * std::log(n_star / (2.0 * std::numbers::pi)) -
             0.5 * n_star * d * d;
    }
    case FamilyKind::GammaPoisson:
      if (y <= 0.0) return neg_inf;
      return s_star * std::log(n_star) + (s_star - 1.0) * std::log(y) -
             n_star * y - std::lgamma(s_star);
    case FamilyKind::InvGammaGamma:
      if (y <= 0.0) return neg_inf;
      return (n_star + 1.0) * std::log(s_star) - (n_star + 2.0) * std::log(y) -
             s_star / y - std::lgamma(n_star + 1.0);
    case FamilyKind::BetaBinomial:
      if (y <= 0.0 || y >= 1.0) return neg_inf;
      return (s_star - 1.0) * std::log(y) +
             (n_star - s_star - 1.0) * std::log1p(-y) -
             log_beta(s_star, n_star - s_star);
    case FamilyKind::InvBetaNegBinomial:
      if (y <= 0.0) return neg_inf;
      return (s_star - 1.0) * std::log(y) -
             (s_star + n_star + 1.0) * std::log1p(y) -
             log_beta(s_star, n_star + 1.0);
    case FamilyKind::GsstGhs:
      return gsst_logpdf(y, s_star, n_star);
  }
  throw std::invalid_argument("conjugate_logpdf: unknown kind");
}

double conjugate_cdf(FamilyKind kind, double y, double s_star, double n_star) {
  check_density_params(kind, s_star, n_star);
  switch (kind) {
    case FamilyKind::NormalNormal:
      return 0.5 * std::erfc(-(y - s_star / n_star) * std::sqrt(n_star / 2.0));
    case FamilyKind::GammaPoisson:
      if (y <= 0.0) return 0.0;
      return boost::math::gamma_p(s_star, n_star * y);
    case FamilyKind::InvGammaGamma:
      if (y <= 0.0) return 0.0;
      return boost::math::gamma_q(n_star + 1.0, s_star / y);
    case FamilyKind::BetaBinomial:
      if (y <= 0.0) return 0.0;
      if (y >= 1.0) return 1.0;
      return boost::math::ibeta(s_star, n_star - s_star, y);
    case FamilyKind::InvBetaNegBinomial:
      if (y <= 0.0) return 0.0;
      return boost::math::ibeta(s_star, n_star + 1.0, y / (1.0 + y));
    case FamilyKind::GsstGhs:
      return gsst_cdf(y, s_star, n_star);
  }
  throw std::invalid_argument("conjugate_cdf: unknown kind");
}

}  // namespace nefqvf
