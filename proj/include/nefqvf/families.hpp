// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

// The six natural exponential families with quadratic variance function,
// paired with their conjugate duals. Each family is exposed through the mean
// parametrization u, with V(u) = nu0 + nu1 u + nu2 u^2, canonical parameter
// theta(u), cumulant M(theta(u)), and log Jacobian log|d theta/d u| = -log V(u).
//
//   kind                   latent S|u            conjugate / marginal
//   NormalNormal           N(n u, n)             N(s0/n0, 1/n0)
//   GammaPoisson           Po(n u)               Ga(s0, n0)
//   InvGammaGamma          Ga(n, rate 1/u)       IGa(n0+1, s0)
//   BetaBinomial           Bin(n, u)             Be(s0, n0-s0)
//   InvBetaNegBinomial     NB(n, u/(1+u))        IBe(s0, n0+1)
//   GsstGhs                GHS(n u, n)           GSSt(s0/n0, n0)

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "nefqvf/rng.hpp"

namespace nefqvf {

enum class FamilyKind {
  NormalNormal,
  GammaPoisson,
  InvGammaGamma,
  BetaBinomial,
  InvBetaNegBinomial,
  GsstGhs,
};

inline constexpr FamilyKind all_families[] = {
    FamilyKind::NormalNormal,      FamilyKind::GammaPoisson,
    FamilyKind::InvGammaGamma,     FamilyKind::BetaBinomial,
    FamilyKind::InvBetaNegBinomial, FamilyKind::GsstGhs,
};

struct QvfCoefficients {
  double nu0, nu1, nu2;
};

struct CanonicalTriplet {
  double theta;         // theta(u)
  double cumulant;      // M(theta(u))
  double log_jacobian;  // log|d theta / d u| = -log V(u)
};

struct MarginalParams {
  double s0;
  double n0;
};

const char* family_name(FamilyKind kind);
FamilyKind family_from_name(const std::string& name);

QvfCoefficients qvf_coefficients(FamilyKind kind);

// True on the open mean domain M of the family.
bool in_mean_domain(FamilyKind kind, double u);

// V(u); throws std::domain_error outside M.
double variance_function(FamilyKind kind, double mu);

// (theta(u), M(theta(u)), log|D_theta(u)|); throws std::domain_error outside M.
CanonicalTriplet canonical_triplet(FamilyKind kind, double u);

// Discrete-trial families need integer weights for the latent draw: Bin does,
// NB generalizes to real n through its gamma-function coefficient.
bool requires_integer_weights(FamilyKind kind);

// Conjugate parameters (s0, n0) valid for `kind`? (n0 > nu2, s0/n0 in M,
// family-specific support such as 0 < s0 < n0 for BetaBinomial.)
void check_conjugate_params(FamilyKind kind, double s0, double n0);

// Validated (kind, s0, n0); construction throws std::invalid_argument on bad
// parameters so draws can skip checks.
class FamilySpec {
 public:
  FamilySpec(FamilyKind kind, double s0, double n0);

  FamilyKind kind() const { return kind_; }
  double s0() const { return params_.s0; }
  double n0() const { return params_.n0; }
  MarginalParams params() const { return params_; }

 private:
  FamilyKind kind_;
  MarginalParams params_;
};

void to_json(nlohmann::json& j, const FamilySpec& spec);
FamilySpec family_spec_from_json(const nlohmann::json& j);

// One draw of U from the marginal (the conjugate law at (s0, n0)).
double sample_marginal(const FamilySpec& spec, Rng& rng);

// One draw from the conjugate law at arbitrary valid (s_star, n_star); the
// marginal is the special case (s0, n0).
double sample_conjugate(FamilyKind kind, double s_star, double n_star, Rng& rng);

// One draw of S | U = u with weight n. Boundary u (e.g. 0 for BetaBinomial)
// yields the degenerate limit.
double sample_latent(FamilyKind kind, double u, double n, Rng& rng);

// log f(s | theta(u), n) = log b(s,n) + theta(u) s - n M(theta(u)).
// Outside the support returns -infinity.
double latent_logpdf(FamilyKind kind, double s, double u, double n);

// log of the conjugate density at (s_star, n_star); -infinity off support,
// std::invalid_argument for invalid parameters.
double conjugate_logpdf(FamilyKind kind, double y, double s_star, double n_star);

// Exact CDF of the conjugate law (numeric integration for GsstGhs).
double conjugate_cdf(FamilyKind kind, double y, double s_star, double n_star);

}  // namespace nefqvf
