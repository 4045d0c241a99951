// Apache License, Version 2.0, refer to LICENSE.txt
#include "nefqvf/ghs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace nefqvf {

namespace {

constexpr double pi = std::numbers::pi;

// sum_{j>=0} log(1 + s^2/(n+2j)^2): direct terms until n+2j >= 20|s|,
// then a Hurwitz-zeta tail. zeta(2m, a) comes from polygamma(2m-1, a).
double log_product(double s, double n) {
  const double s2 = s * s;
  const double lim = std::max(20.0 * std::abs(s), n + 40.0);
  double p = 0.0;
  long j = 0;
  for (double d = n; d < lim; d = n + 2.0 * ++j) p += std::log1p(s2 / (d * d));
  const double a = 0.5 * n + j;
  const double z2 = boost::math::trigamma(a);
  const double z4 = boost::math::polygamma(3, a) / 6.0;
  const double z6 = boost::math::polygamma(5, a) / 120.0;
  p += s2 * z2 / 4.0 - s2 * s2 * z4 / 32.0 + s2 * s2 * s2 * z6 / 192.0;
  return p;
}

}  // namespace

double ghs_log_base(double s, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("ghs_log_base: n must be > 0");
  if (n == 1.0) return -std::abs(pi * s / 2.0) - std::log1p(std::exp(-std::abs(pi * s)));
  return (n - 2.0) * std::log(2.0) + 2.0 * std::lgamma(0.5 * n) - std::log(pi) -
         std::lgamma(n) - log_product(s, n);
}

double ghs_logpdf(double s, double u, double n) {
  return ghs_log_base(s, n) + std::atan(u) * s - 0.5 * n * std::log1p(u * u);
}

namespace {

// Exact draw of a unit-weight tilted GHS: S = (1/pi) log(G1/G2) with
// G1 ~ Ga(1/2 + theta/pi), G2 ~ Ga(1/2 - theta/pi).
double sample_ghs_unit(double theta, Rng& rng) {
  const double a = 0.5 + theta / pi;
  const double b = 0.5 - theta / pi;
  return (log_gamma_draw(a, rng) - log_gamma_draw(b, rng)) / pi;
}

// Exact draw of the tilted component with weight nu in (0, 1), by rejection.
// Every factor of the base-measure product dominates its weight-one
// counterpart (nu + 2j <= 1 + 2j), so
//   b(s, nu) <= e^{c_nu} / cosh(pi s / 2) <= 2 e^{c_nu} e^{-pi |s| / 2},
// and a two-sided exponential tilted by e^{theta s} is a valid envelope.
double sample_ghs_frac(double theta, double nu, Rng& rng) {
  const double rate_pos = pi / 2.0 - theta;
  const double rate_neg = pi / 2.0 + theta;
  const double p_pos = rate_neg / (rate_pos + rate_neg);
  for (int it = 0; it < 100000; ++it) {
    double s = -std::log(uniform_pos(rng));
    s = uniform_pos(rng) <= p_pos ? s / rate_pos : -s / rate_neg;
    // log f - log g = pi|s|/2 - log_product(s, nu) - log 2 <= 0
    const double log_ratio =
        0.5 * pi * std::abs(s) - log_product(s, nu) - std::log(2.0);
    if (std::log(uniform_pos(rng)) < log_ratio) return s;
  }
  // The acceptance rate degrades only for nu -> 0 with |u| huge; fall back
  // to tabulated inversion rather than looping forever.
  const double u = std::tan(theta);
  const double mean = nu * u;
  const double sd = std::sqrt(nu * (1.0 + u * u));
  const double m = 0.5 * nu * std::log1p(u * u);
  GridSampler grid(
      [&](double x) { return ghs_log_base(x, nu) + theta * x - m; },
      mean - 14.0 * sd, mean + 14.0 * sd, mean, sd);
  return grid.draw(rng);
}

}  // namespace

double sample_ghs(double u, double n, Rng& rng) {
  if (!(n > 0.0)) throw std::invalid_argument("sample_ghs: n must be > 0");
  const double theta = std::atan(u);
  double s = 0.0;
  double k = std::floor(n);
  for (long i = 0; i < static_cast<long>(k); ++i) s += sample_ghs_unit(theta, rng);
  const double frac = n - k;
  if (frac > 0.0) s += sample_ghs_frac(theta, frac, rng);
  return s;
}

double gsst_log_norm(double s0, double n0) {
  if (!(n0 > 0.0)) throw std::invalid_argument("gsst_log_norm: n0 must be > 0");
  return std::log(n0 + 1.0) + ghs_log_base(s0, n0 + 2.0);
}

double gsst_logpdf(double y, double s0, double n0) {
  return gsst_log_norm(s0, n0) + s0 * std::atan(y) -
         (0.5 * n0 + 1.0) * std::log1p(y * y);
}

double sample_gsst(double s0, double n0, Rng& rng) {
  if (!(n0 > 0.0)) throw std::invalid_argument("sample_gsst: n0 must be > 0");
  // In phi = atan(y) the log target g(phi) = s0 phi + n0 log cos(phi) has
  // g'' = -n0 sec^2 <= -n0, so a N(phi*, 1/n0) envelope dominates exactly.
  const double phi_star = std::atan(s0 / n0);
  const double g_star = s0 * phi_star + n0 * std::log(std::cos(phi_star));
  std::normal_distribution<double> prop(phi_star, 1.0 / std::sqrt(n0));
  for (int it = 0; it < 100000; ++it) {
    const double phi = prop(rng);
    if (std::abs(phi) >= pi / 2.0) continue;
    const double g = s0 * phi + n0 * std::log(std::cos(phi));
    const double d = phi - phi_star;
    if (std::log(uniform_pos(rng)) < g - g_star + 0.5 * n0 * d * d)
      return std::tan(phi);
  }
  throw std::runtime_error("sample_gsst: rejection sampler failed to accept");
}

double gsst_cdf(double y, double s0, double n0) {
  // Simpson integration of exp(s0 phi + n0 log cos phi) over (-pi/2, atan y],
  // normalized in closed form. The integrand vanishes at -pi/2 (n0 > 0) and
  // is smooth; a fixed fine partition reaches ~1e-10 absolute.
  const double hi = std::atan(y);
  const double lo = -pi / 2.0;
  if (hi <= lo) return 0.0;
  const int intervals = 4096;
  const double h = (hi - lo) / intervals;
  const double lh = gsst_log_norm(s0, n0);
  auto f = [&](double phi) {
    const double c = std::cos(phi);
    if (c <= 0.0) return 0.0;
    return std::exp(lh + s0 * phi + n0 * std::log(c));
  };
  double acc = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  const double v = acc * h / 3.0;
  return std::clamp(v, 0.0, 1.0);
}

GsstCdfTable::GsstCdfTable(double s0, double n0, int nodes) {
  if (nodes < 1025) nodes = 1025;
  const double lh = gsst_log_norm(s0, n0);
  phi_.resize(nodes);
  cdf_.assign(nodes, 0.0);
  const double lo = -pi / 2.0, hi = pi / 2.0;
  std::vector<double> f(nodes);
  for (int i = 0; i < nodes; ++i) {
    phi_[i] = lo + (hi - lo) * static_cast<double>(i) / (nodes - 1);
    const double c = std::cos(phi_[i]);
    f[i] = c > 0.0 ? std::exp(lh + s0 * phi_[i] + n0 * std::log(c)) : 0.0;
  }
  for (int i = 1; i < nodes; ++i)
    cdf_[i] = cdf_[i - 1] + 0.5 * (f[i] + f[i - 1]) * (phi_[i] - phi_[i - 1]);
  // The table carries its own normalization so endpoint values are exact.
  const double total = cdf_.back();
  for (double& v : cdf_) v /= total;
}

double GsstCdfTable::operator()(double y) const {
  const double phi = std::atan(y);
  if (phi <= phi_.front()) return 0.0;
  if (phi >= phi_.back()) return 1.0;
  const double step = (phi_.back() - phi_.front()) / (phi_.size() - 1);
  const std::size_t i =
      std::min(phi_.size() - 2,
               static_cast<std::size_t>((phi - phi_.front()) / step));
  const double t = (phi - phi_[i]) / (phi_[i + 1] - phi_[i]);
  return cdf_[i] + t * (cdf_[i + 1] - cdf_[i]);
}

GridSampler::GridSampler(const std::function<double(double)>& log_density,
                         double lo, double hi, double mode, double sigma,
                         int nodes) {
  if (nodes < 4096) nodes = 4096;
  const double a = std::max(lo, mode - 4.0 * sigma);
  const double b = std::min(hi, mode + 4.0 * sigma);
  const int n_core = nodes / 2;
  const int n_side = (nodes - n_core) / 2;
  x_.reserve(n_core + 2 * n_side + 3);
  auto fill = [&](double from, double to, int k) {
    for (int i = 0; i < k; ++i)
      x_.push_back(from + (to - from) * static_cast<double>(i) / k);
  };
  fill(lo, a, n_side);
  fill(a, b, n_core);
  fill(b, hi, n_side);
  x_.push_back(hi);
  x_.erase(std::unique(x_.begin(), x_.end()), x_.end());

  // Trapezoid CDF; relative normalization cancels any density constant.
  std::vector<double> pdf(x_.size());
  double fmax = -1e308;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    pdf[i] = log_density(x_[i]);
    fmax = std::max(fmax, pdf[i]);
  }
  for (double& v : pdf) v = std::exp(v - fmax);
  cdf_.assign(x_.size(), 0.0);
  for (std::size_t i = 1; i < x_.size(); ++i)
    cdf_[i] = cdf_[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * (x_[i] - x_[i - 1]);
  const double total = cdf_.back();
  if (!(total > 0.0))
    throw std::runtime_error("GridSampler: density vanishes on the grid");
  for (double& v : cdf_) v /= total;
}

double GridSampler::draw(Rng& rng) const {
  const double q = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), q);
  if (it == cdf_.begin()) return x_.front();
  if (it == cdf_.end()) return x_.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[i - 1], c1 = cdf_[i];
  if (c1 <= c0) return x_[i];
  const double t = (q - c0) / (c1 - c0);
  return x_[i - 1] + t * (x_[i] - x_[i - 1]);
}

double GridSampler::cdf(double x) const {
  if (x <= x_.front()) return 0.0;
  if (x >= x_.back()) return 1.0;
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin());
  const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return cdf_[i - 1] + t * (cdf_[i] - cdf_[i - 1]);
}

}  // namespace nefqvf
