#pragma once

#include "pbvar/analysis.hpp"
#include "pbvar/config.hpp"
#include "pbvar/panel_data.hpp"
#include "pbvar/posterior.hpp"
#include "pbvar/prior.hpp"
#include "pbvar/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pbvar {

/// Regression matrices, prior inputs and posterior for one panel.
struct Estimate {
  RegressionData data;
  Ar1Stats ar1;
  DummyObservations dummies;
  PosteriorMoments moments;
};

/// `panel` must already hold exactly the model variables in model order.
Estimate estimate_model(const PanelDataset& panel, std::size_t lags, const PriorSettings& prior);

struct GroupOutcome {
  std::string name;  // empty for the full panel
  std::filesystem::path dir;
  Estimate estimate;
  AnalysisOutput analysis;
  std::optional<RecoveryReport> recovery;
  bool jittered = false;
};

struct RunOutcome {
  std::vector<GroupOutcome> groups;
};

/// Full pipeline: load/transform (or simulate), estimate, sample, identify,
/// summarize, and write irf.csv, fevd.csv and manifest.json per group.
RunOutcome run_pipeline(const RunConfig& config, std::ostream& log);

/// Writes panel.csv, shocks.csv and true_irf.csv for a simulator config.
SimulatedPanel simulate_to_disk(const RunConfig& config, std::ostream& log);

/// `pbvar run|validate|simulate <config>`. Returns the process exit status:
/// 0 success, 2 invalid input, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pbvar
