// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

// Metropolis-within-Gibbs fitting of the inverse-gamma/gamma dependence
// model: y_i ~ IGa(n*_i + 1, s*_i) with s*_i = beta + sum_{d_i} s_j,
// n*_i = (alpha - 1) + sum_{d_i} n_j. Exact Gibbs draws for u and the weight
// rate, adaptive log-scale random walks for s, n, log(alpha-1), log(beta).
// DIC uses the conditional (latent-given) deviance.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nefqvf/graph.hpp"
#include "nefqvf/rng.hpp"

namespace nefqvf {

struct Dataset {
  std::vector<double> y;       // strictly positive observations
  NeighborhoodGraph graph;     // graph.m == y.size()
};

void check_dataset(const Dataset& data);

struct Priors {
  double alpha_shape = 0.1;  // alpha ~ Ga(shape, rate), truncated to alpha > 1
  double alpha_rate = 0.1;
  double beta_shape = 0.1;   // beta ~ Ga(shape, rate)
  double beta_rate = 0.1;
  double weight_shape = 1.0;  // n_j | rate ~ Ga(weight_shape, rate)
  double hyper_shape = 1.0;   // rate ~ Ga(hyper_shape, hyper_rate)
  double hyper_rate = 1.0;
};

struct McmcState {
  double alpha = 2.0;      // > 1; the marginal IGa shape (n0 = alpha - 1)
  double beta = 1.0;       // > 0; the marginal IGa scale (s0 = beta)
  double u = 1.0;          // > 0
  std::vector<double> s;   // latent sums, > 0
  std::vector<double> n;   // latent weights, > 0
  double hyper_rate = 1.0; // > 0; rate of the weight prior
};

struct McmcConfig {
  std::int64_t iterations = 15000;
  std::int64_t burnin = 5000;
  int thin = 5;
  int chains = 2;
  bool prior_only = false;       // drop the y-likelihood factors
  double target_accept = 0.35;   // Robbins-Monro target during burn-in
  double initial_scale = 0.1;    // random-walk sd on the log scale
};

struct McmcSample {
  double alpha, beta, u, hyper_rate, deviance;
  std::vector<double> s, n;
};

struct ChainTrace {
  int chain_id = 0;
  std::vector<McmcSample> samples;
  std::map<std::string, double> acceptance;  // post-burn-in rate per block
};

struct McmcTrace {
  std::vector<ChainTrace> chains;
  McmcConfig config;
  std::uint64_t seed = 0;
};

// Method-of-moments start: alpha = 2 + mean^2/var (capped), beta =
// mean*(alpha-1), u = mean, n_j = 1, s_j = n_j*u. `clamped` reports whether
// the cap was hit (degenerate variance).
McmcState init_state(const Dataset& data, const Priors& priors, Rng& rng,
                     bool* clamped = nullptr);

// Exact conjugate draw: u | rest ~ IGa(alpha + sum n_j, beta + sum s_j).
void update_u(McmcState& state, const Dataset& data, Rng& rng);

// One random-walk Metropolis step on log s_j for each j; returns acceptance
// flags. `scales` holds one proposal sd per coordinate.
std::vector<std::uint8_t> update_s(McmcState& state, const Dataset& data,
                                   const std::vector<double>& scales, Rng& rng,
                                   bool prior_only = false);

// Coordinate-wise steps on log(alpha - 1) and log beta; flags {alpha, beta}.
std::vector<std::uint8_t> update_alpha_beta(McmcState& state,
                                            const Dataset& data,
                                            const Priors& priors,
                                            const std::vector<double>& scales,
                                            Rng& rng, bool prior_only = false);

// Steps on log n_j for each j, then an exact Gibbs draw of the weight rate
// from Ga(hyper_shape + m*weight_shape, hyper_rate + sum n_j).
std::vector<std::uint8_t> update_weights(McmcState& state, const Dataset& data,
                                         const Priors& priors,
                                         const std::vector<double>& scales,
                                         Rng& rng, bool prior_only = false);

// -2 sum_i log IGa(y_i; n*_i + 1, s*_i) at the current state.
double conditional_deviance(const McmcState& state, const Dataset& data);

// Full sweeps (u, s, alpha/beta, weights) with Robbins-Monro adaptation
// during burn-in only; chain c runs on stream c of `seed`.
McmcTrace run_chain(const Dataset& data, const Priors& priors,
                    const McmcConfig& config, std::uint64_t seed);

struct DicResult {
  double dic, d_bar, p_d;
};

// d_bar = mean retained deviance; p_d = d_bar - deviance at the
// retained-sample mean of (alpha, beta, s, n); dic = d_bar + p_d.
DicResult dic(const McmcTrace& trace, const Dataset& data);

struct Prediction {
  int unit;
  double point, lower95, upper95;
};

// Per unit: point = mean of s*_i/n*_i over retained samples; interval =
// 2.5/97.5 percentiles of one IGa(n*_i+1, s*_i) draw per retained sample.
std::vector<Prediction> posterior_predict(const McmcTrace& trace,
                                          const Dataset& data,
                                          std::uint64_t seed);

struct ParamDiagnostic {
  std::string name;
  double mean = 0.0;
  double psrf = 0.0;  // sqrt(1 + B/(nW)); exactly 1 for identical chains
  double ess = 0.0;   // Geyer initial-positive-sequence, summed over chains
  std::vector<std::vector<double>> ergodic_mean;  // per chain, running mean
};

struct ConvergenceReport {
  std::vector<ParamDiagnostic> params;               // alpha, beta, u,
                                                     // hyper_rate, deviance
  std::map<std::string, double> acceptance;          // averaged over chains
};

ConvergenceReport convergence_summary(const McmcTrace& trace);

struct DicScanRow {
  int q = 0;
  bool ok = false;
  DicResult result{};
  bool best = false;
  std::string error;
};

// Fits one temporal model per q; failures are recorded per row, never abort
// the scan.
std::vector<DicScanRow> dic_scan(const std::vector<double>& y,
                                 const std::vector<int>& q_list,
                                 const Priors& priors, const McmcConfig& config,
                                 std::uint64_t seed);

}  // namespace nefqvf
