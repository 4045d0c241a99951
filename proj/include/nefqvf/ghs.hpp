// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

// Numerics for the generalized hyperbolic secant family GHS(nu, n) and its
// conjugate scaled-Student family GSSt(s0/n0, n0). The base density
//   b(s,n) = 2^{n-2} Gamma(n/2)^2 / (pi Gamma(n)) * prod_{j>=0} (1+s^2/(n+2j)^2)^{-1}
// is evaluated by direct terms plus a closed polygamma tail, and the GSSt
// normalizer is h(s0,n0) = (n0+1) b(s0,n0+2). Sampling is exact: tilted GHS
// with integer weight as a sum of scaled log-gamma ratios, GSSt by rejection
// in phi = atan(y) space; fractional GHS weights fall back to an inverse-CDF
// grid.

#include <functional>
#include <vector>

#include "nefqvf/rng.hpp"

namespace nefqvf {

// log b(s, n), n > 0.
double ghs_log_base(double s, double n);

// log density of S ~ GHS(n u, n): b(s,n) exp{atan(u) s - (n/2) log(1+u^2)}.
double ghs_logpdf(double s, double u, double n);

// One draw of S ~ GHS(n u, n); exact for integer n, grid-assisted otherwise.
double sample_ghs(double u, double n, Rng& rng);

// log of the GSSt(s0/n0, n0) normalizer h(s0, n0); requires n0 > 1 for
// finite variance but is defined for any n0 > 0.
double gsst_log_norm(double s0, double n0);

// log density of Y ~ GSSt(s0/n0, n0): h exp{s0 atan y} (1+y^2)^{-n0/2-1}.
double gsst_logpdf(double y, double s0, double n0);

// One draw of Y ~ GSSt(s0/n0, n0); exact rejection sampler.
double sample_gsst(double s0, double n0, Rng& rng);

// P(Y <= y) for Y ~ GSSt(s0/n0, n0), by adaptive quadrature in atan space.
double gsst_cdf(double y, double s0, double n0);

// Cumulative table for the GSSt CDF in phi = atan(y) space (compact
// support, so tails are exact); built once, then O(log n) per evaluation.
// Absolute error ~1e-8 with the default node count.
class GsstCdfTable {
 public:
  GsstCdfTable(double s0, double n0, int nodes = 8193);
  double operator()(double y) const;

 private:
  std::vector<double> phi_;
  std::vector<double> cdf_;
};

// Tabulated inverse-CDF sampler for a continuous unimodal density on
// [lo, hi], given its log density (unnormalized). Nodes are graded: half of
// them inside mode +/- 4 sigma. CDF error is O(h^2); with the default node
// count it stays below 1e-6 for the densities used here.
class GridSampler {
 public:
  GridSampler(const std::function<double(double)>& log_density, double lo,
              double hi, double mode, double sigma, int nodes = 8193);

  double draw(Rng& rng) const;
  double cdf(double x) const;

 private:
  std::vector<double> x_;
  std::vector<double> cdf_;
};

}  // namespace nefqvf
