// Apache License, Version 2.0, refer to LICENSE.txt
//
// Command-line front end: graph construction, process simulation, exact
// moments and correlations, Monte-Carlo validation, MCMC fitting,
// prediction, and DIC scans over temporal orders. Every artifact embeds
// the seed, a hash of the resolved run configuration, and the tool version.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nefqvf/families.hpp"
#include "nefqvf/graph.hpp"
#include "nefqvf/inference.hpp"
#include "nefqvf/io.hpp"
#include "nefqvf/process.hpp"
#include "nefqvf/version.hpp"

namespace {

using nlohmann::json;
using namespace nefqvf;

constexpr int kExitParse = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value) {
  if (flag_given) return flag_value;
  if (const char* env = std::getenv("NEFQVF_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("NEFQVF_SEED is not an unsigned integer: ") +
                       env);
    }
  }
  return 1;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

ModelSpec preset_model(const std::string& name, double n0) {
  // s0 = n0 puts the marginal mean at 1 in every preset.
  FamilySpec fam(FamilyKind::GammaPoisson, n0, n0);
  if (name == "fig3-temporal") return ModelSpec(fam, temporal_graph(16, 2));
  if (name == "fig4-spatial" || name == "fig2-lattice") {
    const AdjacencyList adj{5,
                            {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}}};
    return ModelSpec(fam, spatial_graph(adj));
  }
  throw ValidationError("unknown preset: " + name);
}

ModelSpec load_model(const std::string& spec_path, const std::string& preset,
                     double n0) {
  if (!preset.empty()) return preset_model(preset, n0);
  if (spec_path.empty())
    throw ValidationError("either --spec or --preset is required");
  json j;
  try {
    j = json::parse(read_text_file(spec_path));
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec JSON: ") + e.what());
  }
  return model_spec_from_json(j);
}

json model_config_json(const ModelSpec& spec) {
  json j;
  to_json(j, spec);
  return j;
}

Dataset load_dataset(const std::string& data_path,
                     const std::string& adjacency_path, int q) {
  if (data_path.empty()) throw ValidationError("--data is required");
  const std::vector<double> y = read_y_csv(read_text_file(data_path));
  NeighborhoodGraph graph;
  if (!adjacency_path.empty()) {
    const AdjacencyList adj = adjacency_from_csv(
        read_text_file(adjacency_path), static_cast<int>(y.size()));
    graph = spatial_graph(adj);
  } else {
    graph = temporal_graph(static_cast<int>(y.size()), q);
  }
  return Dataset{y, std::move(graph)};
}

std::string correlation_csv(const std::string& scenario, const ModelSpec& spec,
                            const std::vector<std::pair<int, int>>& pairs,
                            const McReport* mc, std::uint64_t seed,
                            const std::string& hash) {
  std::ostringstream os;
  os << csv_meta_comment(seed, hash)
     << "scenario,i,k,analytic,mc_estimate,mc_se\n";
  for (auto [i, k] : pairs) {
    os << scenario << ',' << i << ',' << k << ','
       << format_double(correlation(spec, i, k)) << ',';
    bool found = false;
    if (mc) {
      for (const auto& row : mc->rows) {
        if (row.check == "correlation" &&
            ((row.i == i && row.k == k) || (row.i == k && row.k == i))) {
          os << format_double(row.estimate) << ',' << format_double(row.se);
          found = true;
          break;
        }
      }
    }
    if (!found) os << ',';
    os << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjugate hierarchical process toolkit"};
  app.set_version_flag("--version", nefqvf::version);
  app.require_subcommand(1);

  std::string spec_path, data_path, adjacency_path, preset, out_path;
  std::string format = "csv";
  std::string graph_type = "temporal";
  double n0 = 1.0;
  int q = 0;
  int season = 7;
  int horizon = 1;
  int m_units = 0;
  std::vector<int> q_list;
  std::int64_t replicates = 0;
  std::int64_t iters = 15000, burnin = 5000;
  int thin = 5, chains = 2, threads = 1;
  std::uint64_t seed_flag = 1;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_flag,
                    "RNG seed (default: NEFQVF_SEED env, else 1)")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--out", out_path, "output path (default: stdout)");
    cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    return cmd;
  };

  CLI::App* c_graph = add_common(app.add_subcommand(
      "graph", "Build a neighborhood graph and write it as JSON"));
  c_graph->add_option("--spec", spec_path, "graph spec JSON");
  c_graph->add_option("--adjacency", adjacency_path, "edge-list CSV");
  c_graph->add_option("--type", graph_type,
                      "temporal|seasonal|periodic|spatial|spatiotemporal")
      ->check(CLI::IsMember(
          {"temporal", "seasonal", "periodic", "spatial", "spatiotemporal"}));
  c_graph->add_option("--m", m_units, "number of units");
  c_graph->add_option("--q", q, "lag order");
  c_graph->add_option("--season", season, "seasonal period");
  c_graph->add_option("--horizon", horizon,
                      "temporal depth for spatiotemporal graphs");

  CLI::App* c_sim = add_common(app.add_subcommand(
      "simulate", "Draw joint replicates (u, s, y) from a model spec"));
  c_sim->add_option("--spec", spec_path, "model spec JSON");
  c_sim->add_option("--preset", preset,
                    "fig3-temporal|fig4-spatial|fig2-lattice");
  c_sim->add_option("--n0", n0, "preset n0 (s0 = n0)");
  c_sim->add_option("--replicates", replicates, "number of draws");

  CLI::App* c_mom = add_common(
      app.add_subcommand("moments", "Exact per-unit means and variances"));
  c_mom->add_option("--spec", spec_path, "model spec JSON");
  c_mom->add_option("--preset", preset, "preset name");
  c_mom->add_option("--n0", n0, "preset n0");

  CLI::App* c_corr = add_common(app.add_subcommand(
      "correlation", "Analytic (and optional MC) pairwise correlations"));
  c_corr->add_option("--spec", spec_path, "model spec JSON");
  c_corr->add_option("--preset", preset, "preset name");
  c_corr->add_option("--n0", n0, "preset n0");
  c_corr->add_option("--replicates", replicates,
                     "MC replicates (0 = analytic only)");
  c_corr->add_option("--threads", threads, "worker threads for the MC pass");

  CLI::App* c_val = add_common(app.add_subcommand(
      "validate", "Monte-Carlo check of exact moments and correlations"));
  c_val->add_option("--spec", spec_path, "model spec JSON");
  c_val->add_option("--preset", preset, "preset name");
  c_val->add_option("--n0", n0, "preset n0");
  c_val->add_option("--replicates", replicates, "number of replicates");
  c_val->add_option("--threads", threads, "worker threads");

  auto add_fit_options = [&](CLI::App* cmd, bool scan) {
    cmd->add_option("--data", data_path, "CSV with one 'y' column");
    if (!scan) {
      cmd->add_option("--adjacency", adjacency_path,
                      "edge-list CSV (spatial model)");
      cmd->add_option("--q", q, "temporal lag order");
    } else {
      cmd->add_option("--q", q_list, "lag orders to scan (repeatable)")
          ->expected(-1);
    }
    cmd->add_option("--iters", iters, "MCMC iterations per chain");
    cmd->add_option("--burnin", burnin, "burn-in iterations");
    cmd->add_option("--thin", thin, "thinning stride");
    cmd->add_option("--chains", chains, "number of chains");
    return cmd;
  };

  CLI::App* c_fit = add_common(add_fit_options(
      app.add_subcommand("fit",
                         "Metropolis-within-Gibbs fit; writes <out>_trace.csv "
                         "and <out>_summary.json"),
      false));
  CLI::App* c_pred = add_common(add_fit_options(
      app.add_subcommand("predict",
                         "Fit, then write per-unit predictive point/interval"),
      false));
  CLI::App* c_scan = add_common(add_fit_options(
      app.add_subcommand("dic-scan",
                         "Fit one temporal model per --q value, rank by DIC"),
      true));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    const std::uint64_t seed = resolve_seed(seed_given, seed_flag);

    if (app.got_subcommand(c_graph)) {
      NeighborhoodGraph graph;
      json config;
      if (!spec_path.empty()) {
        json j;
        try {
          j = json::parse(read_text_file(spec_path));
        } catch (const json::exception& e) {
          throw ParseError(std::string("spec JSON: ") + e.what());
        }
        graph = graph_from_any_json(j);
        config = {{"command", "graph"}, {"spec", j}};
      } else if (!adjacency_path.empty()) {
        const AdjacencyList adj =
            adjacency_from_csv(read_text_file(adjacency_path), m_units);
        graph = graph_type == "spatiotemporal"
                    ? spatiotemporal_graph(adj, horizon, q)
                    : spatial_graph(adj);
        config = {{"command", "graph"},
                  {"type", graph_type},
                  {"adjacency", adjacency_path},
                  {"q", q},
                  {"horizon", horizon}};
      } else {
        if (m_units <= 0)
          throw ValidationError("graph: --m is required without --spec");
        if (graph_type == "temporal")
          graph = temporal_graph(m_units, q);
        else if (graph_type == "seasonal")
          graph = seasonal_graph(m_units, q, season);
        else if (graph_type == "periodic")
          graph = periodic_graph(
              m_units, PeriodicSpec{season, std::vector<int>(season, q)});
        else
          throw ValidationError("graph: --type " + graph_type +
                                " needs --adjacency");
        config = {{"command", "graph"},
                  {"type", graph_type},
                  {"m", m_units},
                  {"q", q},
                  {"season", season}};
      }
      json out;
      to_json(out, graph);
      out["meta"] = meta_json(seed, spec_hash_hex(config));
      emit(out_path, out.dump(2) + "\n");
      return 0;
    }

    if (app.got_subcommand(c_sim)) {
      const ModelSpec spec = load_model(spec_path, preset, n0);
      if (replicates < 1) replicates = 1;
      const json config = {{"command", "simulate"},
                           {"model", model_config_json(spec)},
                           {"replicates", replicates}};
      const std::string hash = spec_hash_hex(config);
      if (format == "json") {
        json reps = json::array();
        for (std::int64_t r = 0; r < replicates; ++r) {
          Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
          const ProcessDraw d = simulate(spec, rng);
          reps.push_back({{"rep", r + 1}, {"u", d.u}, {"s", d.s}, {"y", d.y}});
        }
        const json out = {{"meta", meta_json(seed, hash)},
                          {"replicates", reps}};
        emit(out_path, out.dump(2) + "\n");
      } else {
        std::ostringstream os;
        os << csv_meta_comment(seed, hash) << "rep,u";
        for (int i = 1; i <= spec.m(); ++i) os << ",y" << i;
        os << '\n';
        for (std::int64_t r = 0; r < replicates; ++r) {
          Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
          const ProcessDraw d = simulate(spec, rng);
          os << (r + 1) << ',' << format_double(d.u);
          for (double v : d.y) os << ',' << format_double(v);
          os << '\n';
        }
        emit(out_path, os.str());
      }
      return 0;
    }

    if (app.got_subcommand(c_mom)) {
      const ModelSpec spec = load_model(spec_path, preset, n0);
      const json config = {{"command", "moments"},
                           {"model", model_config_json(spec)}};
      const std::string hash = spec_hash_hex(config);
      const double mean = exact_mean(spec);
      const double variance = exact_variance(spec);
      if (format == "json") {
        const json out = {{"meta", meta_json(seed, hash)},
                          {"mean", mean},
                          {"variance", variance},
                          {"units", spec.m()}};
        emit(out_path, out.dump(2) + "\n");
      } else {
        std::ostringstream os;
        os << csv_meta_comment(seed, hash) << "unit,mean,variance\n";
        for (int i = 1; i <= spec.m(); ++i)
          os << i << ',' << format_double(mean) << ','
             << format_double(variance) << '\n';
        emit(out_path, os.str());
      }
      return 0;
    }

    if (app.got_subcommand(c_corr)) {
      const ModelSpec spec = load_model(spec_path, preset, n0);
      const json config = {{"command", "correlation"},
                           {"model", model_config_json(spec)},
                           {"replicates", replicates}};
      const std::string hash = spec_hash_hex(config);
      std::vector<std::pair<int, int>> pairs;
      if (preset == "fig3-temporal") {
        for (int k = 1; k <= spec.m(); ++k) pairs.emplace_back(1, k);
      } else {
        for (int i = 1; i <= spec.m(); ++i)
          for (int k = i; k <= spec.m(); ++k) pairs.emplace_back(i, k);
      }
      std::optional<McReport> mc;
      if (replicates > 0) mc = mc_validate(spec, replicates, seed, threads);
      std::string scenario = "custom";
      if (!preset.empty()) {
        std::ostringstream sc;
        sc << preset << "-n0=" << n0;
        scenario = sc.str();
      }
      emit(out_path, correlation_csv(scenario, spec, pairs,
                                     mc ? &*mc : nullptr, seed, hash));
      return 0;
    }

    if (app.got_subcommand(c_val)) {
      const ModelSpec spec = load_model(spec_path, preset, n0);
      if (replicates < 1000) replicates = 10000;
      const json config = {{"command", "validate"},
                           {"model", model_config_json(spec)},
                           {"replicates", replicates}};
      const std::string hash = spec_hash_hex(config);
      const McReport report = mc_validate(spec, replicates, seed, threads);
      if (format == "json") {
        json out;
        to_json(out, report);
        out["meta"] = meta_json(seed, hash);
        emit(out_path, out.dump(2) + "\n");
      } else {
        emit(out_path, csv_meta_comment(seed, hash) + mc_report_csv(report));
      }
      return 0;
    }

    McmcConfig config;
    config.iterations = iters;
    config.burnin = burnin;
    config.thin = thin;
    config.chains = chains;
    const Priors priors;

    if (app.got_subcommand(c_scan)) {
      if (data_path.empty()) throw ValidationError("--data is required");
      const std::vector<double> y = read_y_csv(read_text_file(data_path));
      if (q_list.empty()) q_list = {0, 1, 2, 3};
      const json cfg = {{"command", "dic-scan"}, {"data", data_path},
                        {"q", q_list},           {"iters", iters},
                        {"burnin", burnin},      {"thin", thin},
                        {"chains", chains}};
      const std::string hash = spec_hash_hex(cfg);
      const auto rows = dic_scan(y, q_list, priors, config, seed);
      bool any_ok = false;
      for (const auto& r : rows) any_ok = any_ok || r.ok;
      if (format == "json") {
        json jrows = json::array();
        for (const auto& r : rows) {
          json jr = {{"q", r.q}, {"ok", r.ok}, {"best", r.best}};
          if (r.ok) {
            jr["dic"] = r.result.dic;
            jr["d_bar"] = r.result.d_bar;
            jr["p_d"] = r.result.p_d;
          } else {
            jr["error"] = r.error;
          }
          jrows.push_back(jr);
        }
        const json out = {{"meta", meta_json(seed, hash)}, {"scan", jrows}};
        emit(out_path, out.dump(2) + "\n");
      } else {
        emit(out_path, dic_scan_csv(rows, seed, hash));
      }
      if (!any_ok) throw NumericError("dic-scan: every fit failed");
      return 0;
    }

    const Dataset data = load_dataset(data_path, adjacency_path, q);
    const json cfg = {
        {"command", app.got_subcommand(c_fit) ? "fit" : "predict"},
        {"data", data_path},
        {"adjacency", adjacency_path},
        {"q", q},
        {"iters", iters},
        {"burnin", burnin},
        {"thin", thin},
        {"chains", chains}};
    const std::string hash = spec_hash_hex(cfg);
    const McmcTrace trace = run_chain(data, priors, config, seed);
    const DicResult dic_result = dic(trace, data);
    const auto predictions = posterior_predict(trace, data, seed + 1);

    if (app.got_subcommand(c_pred)) {
      if (format == "json") {
        json preds = json::array();
        for (const auto& p : predictions)
          preds.push_back({{"unit", p.unit},
                           {"point", p.point},
                           {"lower95", p.lower95},
                           {"upper95", p.upper95}});
        const json out = {{"meta", meta_json(seed, hash)},
                          {"predictions", preds}};
        emit(out_path, out.dump(2) + "\n");
      } else {
        emit(out_path, predictions_csv(predictions, seed, hash));
      }
      return 0;
    }

    const ConvergenceReport report = convergence_summary(trace);
    const std::string base = out_path.empty() ? "fit" : out_path;
    write_text_file(base + "_trace.csv", trace_csv(trace, seed, hash));
    write_text_file(
        base + "_summary.json",
        fit_summary_json(dic_result, predictions, report, seed, hash).dump(2) +
            "\n");
    std::cout << "wrote " << base << "_trace.csv and " << base
              << "_summary.json\n";
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const json::exception& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
