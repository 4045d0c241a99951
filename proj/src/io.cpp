// Apache License, Version 2.0, refer to LICENSE.txt
#include "nefqvf/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nefqvf/version.hpp"

namespace nefqvf {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << text;
}

std::vector<double> read_y_csv(const std::string& text) {
  std::vector<double> y;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (trimmed == "y" || trimmed == "\"y\"") continue;  // header
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(trimmed, &used);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected a number, got \"" + line + "\"");
    }
    if (used != trimmed.size())
      throw ParseError("line " + std::to_string(lineno) +
                       ": trailing characters in \"" + line + "\"");
    y.push_back(v);
  }
  if (y.empty()) throw ParseError("no observations found");
  return y;
}

std::uint64_t spec_hash(const nlohmann::json& spec) {
  const std::string dump = spec.dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;  // FNV prime
  }
  return h;
}

std::string spec_hash_hex(const nlohmann::json& spec) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(spec_hash(spec)));
  return buf;
}

nlohmann::json meta_json(std::uint64_t seed, const std::string& hash) {
  return {{"seed", seed}, {"spec_hash", hash}, {"version", version}};
}

std::string csv_meta_comment(std::uint64_t seed, const std::string& hash) {
  std::ostringstream os;
  os << "# seed=" << seed << "\n# spec_hash=" << hash
     << "\n# version=" << version << "\n";
  return os.str();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trace_csv(const McmcTrace& trace, std::uint64_t seed,
                      const std::string& hash) {
  std::ostringstream os;
  os << csv_meta_comment(seed, hash) << "chain,iter,name,value\n";
  const char* names[] = {"alpha", "beta", "u", "hyper_rate", "deviance"};
  for (const auto& chain : trace.chains) {
    for (std::size_t k = 0; k < chain.samples.size(); ++k) {
      const auto& s = chain.samples[k];
      const double vals[] = {s.alpha, s.beta, s.u, s.hyper_rate, s.deviance};
      for (int p = 0; p < 5; ++p)
        os << chain.chain_id << ',' << (k + 1) << ',' << names[p] << ','
           << format_double(vals[p]) << '\n';
    }
  }
  return os.str();
}

nlohmann::json fit_summary_json(const DicResult& result,
                                const std::vector<Prediction>& predictions,
                                const ConvergenceReport& report,
                                std::uint64_t seed, const std::string& hash) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : predictions)
    preds.push_back({{"unit", p.unit},
                     {"point", p.point},
                     {"lower95", p.lower95},
                     {"upper95", p.upper95}});
  nlohmann::json diagnostics = nlohmann::json::object();
  for (const auto& d : report.params) {
    nlohmann::json entry = {{"mean", d.mean}, {"ess", d.ess}};
    if (std::isfinite(d.psrf)) entry["psrf"] = d.psrf;
    diagnostics[d.name] = entry;
  }
  return {{"meta", meta_json(seed, hash)},
          {"dic", result.dic},
          {"d_bar", result.d_bar},
          {"p_d", result.p_d},
          {"predictions", preds},
          {"diagnostics", diagnostics},
          {"acceptance", report.acceptance}};
}

std::string predictions_csv(const std::vector<Prediction>& predictions,
                            std::uint64_t seed, const std::string& hash) {
  std::ostringstream os;
  os << csv_meta_comment(seed, hash) << "unit,point,lower95,upper95\n";
  for (const auto& p : predictions)
    os << p.unit << ',' << format_double(p.point) << ','
       << format_double(p.lower95) << ',' << format_double(p.upper95) << '\n';
  return os.str();
}

std::string dic_scan_csv(const std::vector<DicScanRow>& rows,
                         std::uint64_t seed, const std::string& hash) {
  std::ostringstream os;
  os << csv_meta_comment(seed, hash) << "q,dic,d_bar,p_d,best,error\n";
  for (const auto& r : rows) {
    os << r.q << ',';
    if (r.ok)
      os << format_double(r.result.dic) << ',' << format_double(r.result.d_bar)
         << ',' << format_double(r.result.p_d) << ',' << (r.best ? 1 : 0)
         << ",\n";
    else
      os << ",,,0," << r.error << '\n';
  }
  return os.str();
}

}  // namespace nefqvf
