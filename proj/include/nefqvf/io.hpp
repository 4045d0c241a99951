// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

// File-format helpers shared by the CLI: CSV readers/writers, the canonical
// spec hash, and the error taxonomy mapped to process exit codes
// (parse -> 2, validation -> 3, numeric -> 4).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nefqvf/inference.hpp"

namespace nefqvf {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// One column of strictly positive reals; a leading "y" header and '#'
// comment lines are tolerated.
std::vector<double> read_y_csv(const std::string& text);

// FNV-1a (64-bit) over the compact canonical dump of a JSON value. Object
// keys are already sorted by the JSON library, so equal specs hash equally.
std::uint64_t spec_hash(const nlohmann::json& spec);
std::string spec_hash_hex(const nlohmann::json& spec);

// Provenance block embedded in every artifact.
nlohmann::json meta_json(std::uint64_t seed, const std::string& hash);
std::string csv_meta_comment(std::uint64_t seed, const std::string& hash);

std::string format_double(double v);  // shortest round-trippable form

// Long-format trace: chain,iter,name,value for the scalar parameters
// (alpha, beta, u, hyper_rate, deviance), iter = retained-sample index.
std::string trace_csv(const McmcTrace& trace, std::uint64_t seed,
                      const std::string& hash);

nlohmann::json fit_summary_json(const DicResult& result,
                                const std::vector<Prediction>& predictions,
                                const ConvergenceReport& report,
                                std::uint64_t seed, const std::string& hash);

std::string predictions_csv(const std::vector<Prediction>& predictions,
                            std::uint64_t seed, const std::string& hash);

std::string dic_scan_csv(const std::vector<DicScanRow>& rows,
                         std::uint64_t seed, const std::string& hash);

}  // namespace nefqvf
