// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

// The three-level hierarchy U -> S -> Y: joint simulation, the (s*, n*)
// pooling update, exact means/variances/correlations of the invariant
// construction, and a Monte-Carlo validation oracle.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "nefqvf/families.hpp"
#include "nefqvf/graph.hpp"
#include "nefqvf/rng.hpp"

namespace nefqvf {

struct ProcessDraw {
  double u = 0.0;
  std::vector<double> s;
  std::vector<double> y;
};

class ModelSpec {
 public:
  // weights empty => all ones. Throws std::invalid_argument on any violated
  // constraint (sizes, positivity, integer weights, conjugate validity of
  // every (s*, n*) reachable).
  ModelSpec(FamilySpec family, NeighborhoodGraph graph,
            std::vector<double> weights = {});

  const FamilySpec& family() const { return family_; }
  const NeighborhoodGraph& graph() const { return graph_; }
  const std::vector<double>& weights() const { return weights_; }
  int m() const { return graph_.m; }

  // Sum of weights over the neighbor set of unit i (1-based).
  double weight_sum(int i) const { return weight_sums_[i - 1]; }

 private:
  FamilySpec family_;
  NeighborhoodGraph graph_;
  std::vector<double> weights_;
  std::vector<double> weight_sums_;
};

// s* = s0 + sum_{j in d_i} s_j, n* = n0 + sum_{j in d_i} n_j.
std::pair<double, double> star_params(const ModelSpec& spec,
                                      const std::vector<double>& s, int i);

// U, then S | U, then each Y_i | S from the conjugate law at (s*_i, n*_i).
ProcessDraw simulate(const ModelSpec& spec, Rng& rng);

double exact_mean(const ModelSpec& spec);       // s0/n0
double exact_variance(const ModelSpec& spec);   // V(s0/n0)/(n0 - nu2)

// Corr(Y_i, Y_k); 1 when i = k; family- and s0-free otherwise. Computed in
// extended precision so algebraically equal pairs compare equal in double.
double correlation(const ModelSpec& spec, int i, int k);

std::vector<std::vector<double>> correlation_matrix(const ModelSpec& spec);

struct CheckRow {
  std::string check;  // "mean", "variance", "correlation", "ks"
  int i = 0;
  int k = 0;          // second unit for correlations, else 0
  double analytic = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
};

struct McReport {
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<CheckRow> rows;
  double ks_y1 = 0.0;     // KS distance of Y_1 against the exact marginal CDF
  double max_abs_z = 0.0;
};

// Simulates `replicates` independent draws on per-replicate seed streams and
// compares MC moments/correlations with the exact values. Deterministic for
// a given seed regardless of `threads` (chunked merge in fixed order).
McReport mc_validate(const ModelSpec& spec, std::int64_t replicates,
                     std::uint64_t seed, int threads = 1);

// MC estimate of E{V(U)} and its standard error from `replicates` draws of U.
std::pair<double, double> mc_latent_variance_identity(const FamilySpec& spec,
                                                      std::int64_t replicates,
                                                      std::uint64_t seed);

void to_json(nlohmann::json& j, const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const McReport& report);
std::string mc_report_csv(const McReport& report);

}  // namespace nefqvf
