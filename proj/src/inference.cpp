// Apache License, Version 2.0, refer to LICENSE.txt
#include "nefqvf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nefqvf {

namespace {

struct SweepContext {
  std::vector<std::vector<int>> rev;  // rev[j] = units i (0-based) with j+1 in d_i
  std::vector<double> A;              // A[i] = sum_{j in d_i} n_j
  std::vector<double> S;              // S[i] = sum_{j in d_i} s_j

  SweepContext(const McmcState& state, const Dataset& data) {
    const int m = data.graph.m;
    rev.resize(m);
    for (int i = 1; i <= m; ++i)
      for (int j : data.graph.at(i)) rev[j - 1].push_back(i - 1);
    refresh(state, data);
  }

  void refresh(const McmcState& state, const Dataset& data) {
    const int m = data.graph.m;
    A.assign(m, 0.0);
    S.assign(m, 0.0);
    for (int i = 1; i <= m; ++i) {
      for (int j : data.graph.at(i)) {
        A[i - 1] += state.n[j - 1];
        S[i - 1] += state.s[j - 1];
      }
    }
  }
};

double log_accept_u(Rng& rng) { return std::log(uniform_pos(rng)); }

std::vector<std::uint8_t> update_s_impl(McmcState& state, const Dataset& data,
                                        const std::vector<double>& scales,
                                        Rng& rng, bool prior_only,
                                        SweepContext& ctx,
                                        std::vector<double>* probs = nullptr) {
  const int m = data.graph.m;
  std::vector<std::uint8_t> accepted(m, 0);
  if (probs) probs->assign(m, 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int j = 0; j < m; ++j) {
    const double cur = state.s[j];
    const double prop = cur * std::exp(scales[j] * normal(rng));
    if (!std::isfinite(prop) || !(prop > 0.0)) continue;
    const double dlog = std::log(prop) - std::log(cur);
    // Ga(s_j; n_j, rate 1/u) factor plus the log-walk Jacobian
    double delta = state.n[j] * dlog - (prop - cur) / state.u;
    if (!prior_only) {
      const double d = prop - cur;
      for (int i : ctx.rev[j]) {
        const double a = state.alpha + ctx.A[i];
        const double b = state.beta + ctx.S[i];
        delta += a * (std::log(b + d) - std::log(b)) - d / data.y[i];
      }
    }
    if (!std::isfinite(delta)) continue;
    if (probs) (*probs)[j] = std::min(1.0, std::exp(delta));
    if (log_accept_u(rng) < delta) {
      state.s[j] = prop;
      for (int i : ctx.rev[j]) ctx.S[i] += prop - cur;
      accepted[j] = 1;
    }
  }
  return accepted;
}

std::vector<std::uint8_t> update_ab_impl(McmcState& state, const Dataset& data,
                                         const Priors& priors,
                                         const std::vector<double>& scales,
                                         Rng& rng, bool prior_only,
                                         SweepContext& ctx,
                                         std::vector<double>* probs = nullptr) {
  const int m = data.graph.m;
  std::vector<std::uint8_t> accepted(2, 0);
  if (probs) probs->assign(2, 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  {  // log(alpha - 1) walk
    const double cur = state.alpha;
    const double prop = 1.0 + (cur - 1.0) * std::exp(scales[0] * normal(rng));
    if (std::isfinite(prop) && prop > 1.0) {
      const double d = prop - cur;
      double delta = (priors.alpha_shape - 1.0) * (std::log(prop) - std::log(cur)) -
                     priors.alpha_rate * d;
      // IGa(u; alpha, beta) factor
      delta += d * (std::log(state.beta) - std::log(state.u)) -
               (std::lgamma(prop) - std::lgamma(cur));
      // Jacobian of the log(alpha-1) walk
      delta += std::log(prop - 1.0) - std::log(cur - 1.0);
      if (!prior_only) {
        for (int i = 0; i < m; ++i) {
          const double a = cur + ctx.A[i];
          const double b = state.beta + ctx.S[i];
          delta += d * (std::log(b) - std::log(data.y[i])) -
                   (std::lgamma(a + d) - std::lgamma(a));
        }
      }
      if (std::isfinite(delta)) {
        if (probs) (*probs)[0] = std::min(1.0, std::exp(delta));
        if (log_accept_u(rng) < delta) {
          state.alpha = prop;
          accepted[0] = 1;
        }
      }
    }
  }

  {  // log(beta) walk
    const double cur = state.beta;
    const double prop = cur * std::exp(scales[1] * normal(rng));
    if (std::isfinite(prop) && prop > 0.0) {
      const double dlog = std::log(prop) - std::log(cur);
      double delta = (priors.beta_shape - 1.0) * dlog -
                     priors.beta_rate * (prop - cur);
      // IGa(u; alpha, beta) factor
      delta += state.alpha * dlog - (prop - cur) / state.u;
      delta += dlog;  // Jacobian
      if (!prior_only) {
        const double d = prop - cur;
        for (int i = 0; i < m; ++i) {
          const double a = state.alpha + ctx.A[i];
          const double b = cur + ctx.S[i];
          delta += a * (std::log(b + d) - std::log(b)) - d / data.y[i];
        }
      }
      if (std::isfinite(delta)) {
        if (probs) (*probs)[1] = std::min(1.0, std::exp(delta));
        if (log_accept_u(rng) < delta) {
          state.beta = prop;
          accepted[1] = 1;
        }
      }
    }
  }
  return accepted;
}

std::vector<std::uint8_t> update_weights_impl(McmcState& state,
                                              const Dataset& data,
                                              const Priors& priors,
                                              const std::vector<double>& scales,
                                              Rng& rng, bool prior_only,
                                              SweepContext& ctx,
                                              std::vector<double>* probs = nullptr) {
  const int m = data.graph.m;
  std::vector<std::uint8_t> accepted(m, 0);
  if (probs) probs->assign(m, 0.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double log_u = std::log(state.u);
  for (int j = 0; j < m; ++j) {
    const double cur = state.n[j];
    const double prop = cur * std::exp(scales[j] * normal(rng));
    if (!std::isfinite(prop) || !(prop > 0.0)) continue;
    const double d = prop - cur;
    const double dlog = std::log(prop) - std::log(cur);
    // Ga(n_j; weight_shape, rate) prior plus the Jacobian
    double delta = priors.weight_shape * dlog - state.hyper_rate * d;
    // Ga(s_j; n_j, rate 1/u) factor
    delta += d * (std::log(state.s[j]) - log_u) -
             (std::lgamma(prop) - std::lgamma(cur));
    if (!prior_only) {
      for (int i : ctx.rev[j]) {
        const double a = state.alpha + ctx.A[i];
        const double b = state.beta + ctx.S[i];
        delta += d * (std::log(b) - std::log(data.y[i])) -
                 (std::lgamma(a + d) - std::lgamma(a));
      }
    }
    if (!std::isfinite(delta)) continue;
    if (probs) (*probs)[j] = std::min(1.0, std::exp(delta));
    if (log_accept_u(rng) < delta) {
      state.n[j] = prop;
      for (int i : ctx.rev[j]) ctx.A[i] += d;
      accepted[j] = 1;
    }
  }
  // Exact Gibbs draw for the weight rate.
  const double sum_n = std::accumulate(state.n.begin(), state.n.end(), 0.0);
  std::gamma_distribution<double> g(priors.hyper_shape + m * priors.weight_shape,
                                    1.0 / (priors.hyper_rate + sum_n));
  state.hyper_rate = g(rng);
  return accepted;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0
                   : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

std::string dump_state(const McmcState& state) {
  std::ostringstream os;
  os << "alpha=" << state.alpha << " beta=" << state.beta << " u=" << state.u
     << " hyper_rate=" << state.hyper_rate << " m=" << state.s.size();
  return os.str();
}

}  // namespace

void check_dataset(const Dataset& data) {
  if (static_cast<int>(data.y.size()) != data.graph.m)
    throw std::invalid_argument("dataset: graph size != observation count");
  if (!validate(data.graph).ok())
    throw std::invalid_argument("dataset: invalid graph");
  for (double v : data.y)
    if (!std::isfinite(v) || !(v > 0.0))
      throw std::invalid_argument("dataset: observations must be > 0");
}

McmcState init_state(const Dataset& data, const Priors& priors, Rng& rng,
                     bool* clamped) {
  (void)priors;
  (void)rng;  // initialization is deterministic
  check_dataset(data);
  const int m = data.graph.m;
  constexpr double alpha_cap = 1e4;
  double mean = 1.0, var = 0.0;
  if (m > 0) {
    mean = mean_of(data.y);
    for (double v : data.y) var += (v - mean) * (v - mean);
    var = m > 1 ? var / (m - 1) : 0.0;
  }
  bool hit_cap = false;
  double alpha;
  if (var > 0.0) {
    alpha = 2.0 + mean * mean / var;
    if (alpha > alpha_cap) { alpha = alpha_cap; hit_cap = true; }
  } else {
    alpha = alpha_cap;
    hit_cap = true;
  }
  if (clamped) *clamped = hit_cap;
  McmcState state;
  state.alpha = alpha;
  state.beta = mean * (alpha - 1.0);
  state.u = mean;
  state.n.assign(m, 1.0);
  state.s.assign(m, 0.0);
  for (int j = 0; j < m; ++j) state.s[j] = state.n[j] * state.u;
  state.hyper_rate = 1.0;
  return state;
}

void update_u(McmcState& state, const Dataset& data, Rng& rng) {
  (void)data;
  const double shape = state.alpha +
      std::accumulate(state.n.begin(), state.n.end(), 0.0);
  const double scale_sum = state.beta +
      std::accumulate(state.s.begin(), state.s.end(), 0.0);
  std::gamma_distribution<double> g(shape, 1.0);
  state.u = scale_sum / g(rng);
}

std::vector<std::uint8_t> update_s(McmcState& state, const Dataset& data,
                                   const std::vector<double>& scales, Rng& rng,
                                   bool prior_only) {
  SweepContext ctx(state, data);
  return update_s_impl(state, data, scales, rng, prior_only, ctx);
}

std::vector<std::uint8_t> update_alpha_beta(McmcState& state,
                                            const Dataset& data,
                                            const Priors& priors,
                                            const std::vector<double>& scales,
                                            Rng& rng, bool prior_only) {
  SweepContext ctx(state, data);
  return update_ab_impl(state, data, priors, scales, rng, prior_only, ctx);
}

std::vector<std::uint8_t> update_weights(McmcState& state, const Dataset& data,
                                         const Priors& priors,
                                         const std::vector<double>& scales,
                                         Rng& rng, bool prior_only) {
  SweepContext ctx(state, data);
  return update_weights_impl(state, data, priors, scales, rng, prior_only, ctx);
}

double conditional_deviance(const McmcState& state, const Dataset& data) {
  double lp = 0.0;
  for (int i = 1; i <= data.graph.m; ++i) {
    double a = state.alpha, b = state.beta;
    for (int j : data.graph.at(i)) {
      a += state.n[j - 1];
      b += state.s[j - 1];
    }
    const double y = data.y[i - 1];
    lp += a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(y) - b / y;
  }
  return -2.0 * lp;
}

McmcTrace run_chain(const Dataset& data, const Priors& priors,
                    const McmcConfig& config, std::uint64_t seed) {
  check_dataset(data);
  if (config.iterations <= config.burnin)
    throw std::invalid_argument("run_chain: iterations must exceed burn-in");
  if (config.thin < 1 || config.chains < 1)
    throw std::invalid_argument("run_chain: thin and chains must be >= 1");
  const int m = data.graph.m;

  McmcTrace trace;
  trace.config = config;
  trace.seed = seed;
  for (int c = 0; c < config.chains; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(c));
    McmcState state = init_state(data, priors, rng);
    SweepContext ctx(state, data);

    std::vector<double> s_scales(m, config.initial_scale);
    std::vector<double> n_scales(m, config.initial_scale);
    std::vector<double> ab_scales(2, config.initial_scale);
    // Robbins-Monro on the log proposal sd, driven by the smoothed
    // acceptance probability min(1, e^delta) rather than the 0/1 flag.
    auto adapt = [&](std::vector<double>& scales,
                     const std::vector<double>& prob, std::int64_t t) {
      const double gain =
          std::min(0.5, 2.0 / std::pow(static_cast<double>(t), 0.6));
      for (std::size_t k = 0; k < scales.size(); ++k) {
        const double ls = std::log(scales[k]) +
                          gain * (prob[k] - config.target_accept);
        scales[k] = std::clamp(std::exp(ls), 1e-4, 10.0);
      }
    };
    std::vector<double> ps, pab, pn;

    ChainTrace chain;
    chain.chain_id = c;
    double acc_s = 0.0, acc_n = 0.0, acc_a = 0.0, acc_b = 0.0;
    std::int64_t post_iters = 0;
    for (std::int64_t it = 1; it <= config.iterations; ++it) {
      ctx.refresh(state, data);
      update_u(state, data, rng);
      const bool adapting = it <= config.burnin;
      auto* wps = adapting ? &ps : nullptr;
      auto* wpab = adapting ? &pab : nullptr;
      auto* wpn = adapting ? &pn : nullptr;
      const auto fs = update_s_impl(state, data, s_scales, rng,
                                    config.prior_only, ctx, wps);
      const auto fab = update_ab_impl(state, data, priors, ab_scales, rng,
                                      config.prior_only, ctx, wpab);
      const auto fn = update_weights_impl(state, data, priors, n_scales, rng,
                                          config.prior_only, ctx, wpn);
      if (adapting) {
        adapt(s_scales, ps, it);
        adapt(ab_scales, pab, it);
        adapt(n_scales, pn, it);
      } else {
        ++post_iters;
        if (m > 0) {
          acc_s += mean_of(std::vector<double>(fs.begin(), fs.end()));
          acc_n += mean_of(std::vector<double>(fn.begin(), fn.end()));
        }
        acc_a += fab[0];
        acc_b += fab[1];
        if ((it - config.burnin) % config.thin == 0) {
          const double dev =
              config.prior_only ? 0.0 : conditional_deviance(state, data);
          if (!std::isfinite(dev) || !std::isfinite(state.alpha) ||
              !std::isfinite(state.beta) || !std::isfinite(state.u))
            throw std::runtime_error("run_chain: non-finite state at " +
                                     dump_state(state));
          chain.samples.push_back(
              {state.alpha, state.beta, state.u, state.hyper_rate, dev,
               state.s, state.n});
        }
      }
    }
    if (post_iters > 0) {
      chain.acceptance["s"] = m > 0 ? acc_s / post_iters : 0.0;
      chain.acceptance["n"] = m > 0 ? acc_n / post_iters : 0.0;
      chain.acceptance["alpha"] = acc_a / post_iters;
      chain.acceptance["beta"] = acc_b / post_iters;
    }
    trace.chains.push_back(std::move(chain));
  }
  return trace;
}

DicResult dic(const McmcTrace& trace, const Dataset& data) {
  std::size_t total = 0;
  for (const auto& c : trace.chains) total += c.samples.size();
  if (total == 0) throw std::invalid_argument("dic: empty trace");
  const int m = data.graph.m;
  double d_bar = 0.0;
  McmcState mean_state;
  mean_state.alpha = mean_state.beta = 0.0;
  mean_state.s.assign(m, 0.0);
  mean_state.n.assign(m, 0.0);
  for (const auto& c : trace.chains) {
    for (const auto& sample : c.samples) {
      d_bar += sample.deviance;
      mean_state.alpha += sample.alpha;
      mean_state.beta += sample.beta;
      for (int j = 0; j < m; ++j) {
        mean_state.s[j] += sample.s[j];
        mean_state.n[j] += sample.n[j];
      }
    }
  }
  const double k = static_cast<double>(total);
  d_bar /= k;
  mean_state.alpha /= k;
  mean_state.beta /= k;
  for (int j = 0; j < m; ++j) {
    mean_state.s[j] /= k;
    mean_state.n[j] /= k;
  }
  const double d_hat = conditional_deviance(mean_state, data);
  const double p_d = d_bar - d_hat;
  return {d_bar + p_d, d_bar, p_d};
}

std::vector<Prediction> posterior_predict(const McmcTrace& trace,
                                          const Dataset& data,
                                          std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& c : trace.chains) total += c.samples.size();
  if (total == 0) throw std::invalid_argument("posterior_predict: empty trace");
  const int m = data.graph.m;
  Rng rng = make_rng(seed, 0);
  std::vector<double> points(m, 0.0);
  std::vector<std::vector<double>> draws(m);
  for (auto& d : draws) d.reserve(total);
  for (const auto& c : trace.chains) {
    for (const auto& sample : c.samples) {
      for (int i = 1; i <= m; ++i) {
        double a = sample.alpha, b = sample.beta;
        for (int j : data.graph.at(i)) {
          a += sample.n[j - 1];
          b += sample.s[j - 1];
        }
        points[i - 1] += b / (a - 1.0);
        std::gamma_distribution<double> g(a, 1.0);
        draws[i - 1].push_back(b / g(rng));
      }
    }
  }
  std::vector<Prediction> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i)
    out.push_back({i + 1, points[i] / static_cast<double>(total),
                   quantile(draws[i], 0.025), quantile(draws[i], 0.975)});
  return out;
}

namespace {

double geyer_ess(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = mean_of(x);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mean;
  auto gamma_at = [&](std::size_t t) {
    double acc = 0.0;
    for (std::size_t i = 0; i + t < n; ++i) acc += d[i] * d[i + t];
    return acc / n;
  };
  const double g0 = gamma_at(0);
  if (!(g0 > 0.0)) return static_cast<double>(n);  // constant series
  double tau = -1.0;
  const std::size_t max_pairs = std::min<std::size_t>((n - 1) / 2, 2000);
  for (std::size_t k = 0; k <= max_pairs; ++k) {
    const double pair = (gamma_at(2 * k) + gamma_at(2 * k + 1)) / g0;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 0.1);
  return static_cast<double>(n) / tau;
}

}  // namespace

ConvergenceReport convergence_summary(const McmcTrace& trace) {
  ConvergenceReport report;
  const std::size_t chains = trace.chains.size();
  if (chains == 0) return report;

  struct Extractor {
    const char* name;
    double (*get)(const McmcSample&);
  };
  const Extractor extractors[] = {
      {"alpha", [](const McmcSample& s) { return s.alpha; }},
      {"beta", [](const McmcSample& s) { return s.beta; }},
      {"u", [](const McmcSample& s) { return s.u; }},
      {"hyper_rate", [](const McmcSample& s) { return s.hyper_rate; }},
      {"deviance", [](const McmcSample& s) { return s.deviance; }},
  };
  for (const auto& ex : extractors) {
    ParamDiagnostic diag;
    diag.name = ex.name;
    std::vector<std::vector<double>> series;
    for (const auto& c : trace.chains) {
      std::vector<double> v;
      v.reserve(c.samples.size());
      for (const auto& s : c.samples) v.push_back(ex.get(s));
      series.push_back(std::move(v));
    }
    double grand = 0.0;
    std::size_t count = 0;
    for (const auto& v : series) {
      for (double t : v) grand += t;
      count += v.size();
    }
    grand /= std::max<std::size_t>(count, 1);
    diag.mean = grand;

    // psrf = sqrt(1 + B/(nW)); exactly 1 when all chain means coincide
    const std::size_t n = series.front().size();
    if (chains >= 2 && n >= 2) {
      double b = 0.0, w = 0.0;
      for (const auto& v : series) {
        const double cm = mean_of(v);
        b += (cm - grand) * (cm - grand);
        double cv = 0.0;
        for (double t : v) cv += (t - cm) * (t - cm);
        w += cv / (v.size() - 1);
      }
      b *= static_cast<double>(n) / (chains - 1);
      w /= chains;
      diag.psrf = b == 0.0 ? 1.0
                           : std::sqrt(1.0 + b / (static_cast<double>(n) * w));
    } else {
      diag.psrf = std::numeric_limits<double>::quiet_NaN();
    }
    diag.ess = 0.0;
    for (const auto& v : series) diag.ess += geyer_ess(v);
    for (const auto& v : series) {
      std::vector<double> run(v.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        acc += v[i];
        run[i] = acc / (i + 1);
      }
      diag.ergodic_mean.push_back(std::move(run));
    }
    report.params.push_back(std::move(diag));
  }
  for (const auto& c : trace.chains)
    for (const auto& [k, v] : c.acceptance) report.acceptance[k] += v / chains;
  return report;
}

std::vector<DicScanRow> dic_scan(const std::vector<double>& y,
                                 const std::vector<int>& q_list,
                                 const Priors& priors, const McmcConfig& config,
                                 std::uint64_t seed) {
  if (q_list.empty()) throw std::invalid_argument("dic_scan: empty q list");
  std::vector<DicScanRow> rows;
  for (int q : q_list) {
    DicScanRow row;
    row.q = q;
    try {
      Dataset data{y, temporal_graph(static_cast<int>(y.size()), q)};
      McmcTrace trace = run_chain(data, priors, config, seed);
      row.result = dic(trace, data);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  const DicScanRow* best = nullptr;
  for (const auto& r : rows)
    if (r.ok && (!best || r.result.dic < best->result.dic)) best = &r;
  if (best)
    for (auto& r : rows) r.best = (&r == best);
  return rows;
}

}  // namespace nefqvf
