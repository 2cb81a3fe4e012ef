#pragma once

#include "pbvar/analysis.hpp"
#include "pbvar/panel_data.hpp"
#include "pbvar/posterior.hpp"
#include "pbvar/prior.hpp"
#include "pbvar/simulator.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pbvar {

enum class DataSource { csv, simulator };
enum class IdentificationMode { single, orthogonal_pair };

struct CountryGroup {
  std::string name;
  std::vector<std::string> countries;
};

/// Everything a run needs; one config file fully determines it.
struct RunConfig {
  DataSource source = DataSource::csv;
  std::filesystem::path data_path;
  std::vector<std::string> columns;    // CSV schema; defaults to variables + transform inputs
  std::vector<std::string> variables;  // endogenous, in model order
  TransformSpec transforms;
  NewsDgp dgp;  // simulator source only

  std::size_t lags = 15;
  PriorSettings prior;

  std::string target;
  std::size_t horizon = 5;
  IdentificationMode mode = IdentificationMode::single;
  std::string orthogonal_to;  // first-identified target in orthogonal-pair mode

  SamplerSettings sampler;
  std::size_t irf_horizon = 20;
  std::vector<double> probs = kDefaultProbs;

  std::vector<CountryGroup> groups;
  std::filesystem::path output_dir;
  bool write_draws = false;
};

/// Parses TOML text. Relative paths resolve against `base_dir`; when no output
/// directory is configured it defaults to $PBVAR_OUTPUT_ROOT/<stem> (or
/// ./pbvar-out/<stem>). Throws InputError on syntax errors, unknown keys,
/// and type mismatches.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view stem = "run");
RunConfig load_config(const std::filesystem::path& path);

/// Cross-reference checks (variables, target, groups, CSV header).
void validate_config(const RunConfig& config);

/// Human-readable listing of resolved settings and the modelling choices in force.
std::string validation_report(const RunConfig& config);

/// Canonical JSON of the resolved configuration (excluding worker count).
nlohmann::json resolved_config_json(const RunConfig& config);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

/// Fixed modelling choices, reported by `validate` and recorded in manifests.
std::vector<std::string> modelling_decisions(const RunConfig& config);

}  // namespace pbvar
