#include "pbvar/pipeline.hpp"

#include "pbvar/errors.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace pbvar {

Estimate estimate_model(const PanelDataset& panel, std::size_t lags, const PriorSettings& prior) {
  Estimate e;
  e.data = build_regression_matrices(panel, lags);

  PanelDataset kept = panel;
  std::erase_if(kept.countries, [&](const CountryBlock& c) {
    return std::find(e.data.dropped_countries.begin(), e.data.dropped_countries.end(), c.id) !=
           e.data.dropped_countries.end();
  });
  e.ar1 = estimate_ar1_stats(kept, prior.s_floor_scale);
  e.dummies = build_dummy_observations(e.ar1, prior, lags, e.data.n_exog());
  const auto system = augment(e.data, e.dummies);
  e.moments = compute_posterior_moments(system.y, system.x, e.data.column_index);
  return e;
}

namespace {

std::string slurp_csv(const auto& writer, const auto& result) {
  std::ostringstream os;
  writer(result, os);
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::vector<std::size_t> indices_of(const std::vector<std::string>& all, const std::vector<std::string>& wanted) {
  std::vector<std::size_t> out;
  for (const auto& w : wanted) {
    const auto it = std::find(all.begin(), all.end(), w);
    if (it == all.end()) throw InputError("unknown variable '" + w + "'");
    out.push_back(static_cast<std::size_t>(it - all.begin()));
  }
  return out;
}

PanelDataset load_model_panel(const RunConfig& cfg, std::ostream& log) {
  const auto raw = load_panel(cfg.data_path, cfg.columns, cfg.lags);
  for (const auto& w : raw.warnings) log << "[pbvar] warning: " << w << '\n';
  return select_variables(apply_transforms(raw, cfg.transforms), cfg.variables);
}

GroupOutcome run_group(const RunConfig& cfg, const std::string& name, const PanelDataset& panel,
                       const SimulatedPanel* sim, const std::filesystem::path& dir, std::ostream& log) {
  GroupOutcome g;
  g.name = name;
  g.dir = dir;
  const std::string label = name.empty() ? "full panel" : "group " + name;

  g.estimate = estimate_model(panel, cfg.lags, cfg.prior);
  const auto& est = g.estimate;
  for (const auto& c : est.data.dropped_countries) {
    log << "[pbvar] " << label << ": dropped country " << c << " (insufficient complete years)\n";
  }
  log << "[pbvar] " << label << ": " << est.data.n_rows() << " rows, K = " << est.data.n_regressors()
      << ", inverse-Wishart dof = " << est.moments.dof << " (augmented rows - K + 2)\n";

  const PosteriorSampler sampler(est.moments);
  g.jittered = sampler.jittered();
  if (g.jittered) log << "[pbvar] " << label << ": posterior scale matrix needed diagonal jitter\n";
  const auto draws = sample_posterior(est.moments, cfg.sampler);

  IdentificationSettings ident;
  ident.target = indices_of(cfg.variables, {cfg.target}).front();
  ident.horizon = cfg.horizon;
  if (cfg.mode == IdentificationMode::orthogonal_pair) {
    ident.orthogonal_to = indices_of(cfg.variables, {cfg.orthogonal_to}).front();
  }
  AnalysisSettings settings;
  settings.irf_horizon = cfg.irf_horizon;
  settings.probs = cfg.probs;
  settings.workers = cfg.sampler.workers;
  g.analysis = analyze_draws(draws, cfg.variables, cfg.lags, ident, settings, sim ? &est.data : nullptr);

  const double max_impact = std::transform_reduce(
      g.analysis.target_impacts.begin(), g.analysis.target_impacts.end(), 0.0,
      [](double a, double b) { return std::max(a, b); }, [](double v) { return std::abs(v); });
  if (max_impact > 1e-12) {
    throw NumericalError("identification/identify_news_shock", "zero impact restriction violated on a draw");
  }

  std::filesystem::create_directories(dir);
  const auto irf_text = slurp_csv(write_irf_csv, g.analysis.irf);
  const auto fevd_text = slurp_csv(write_fevd_csv, g.analysis.fevd);
  write_file(dir / "irf.csv", irf_text);
  write_file(dir / "fevd.csv", fevd_text);
  if (cfg.write_draws) write_draws(dir / "draws", draws);

  nlohmann::json manifest;
  const auto resolved = resolved_config_json(cfg);
  manifest["config_hash"] = fnv1a_hex(resolved.dump());
  manifest["group"] = name;
  manifest["seed"] = cfg.sampler.seed;
  manifest["n_draws"] = cfg.sampler.n_draws;
  manifest["n_burn"] = cfg.sampler.n_burn;
  manifest["retained_draws"] = cfg.sampler.retained();
  manifest["workers"] = cfg.sampler.workers;
  manifest["rows"] = est.data.n_rows();
  manifest["regressors"] = est.data.n_regressors();
  manifest["dof"] = est.moments.dof;
  manifest["omega_bar_jittered"] = g.jittered;
  std::vector<std::string> countries;
  for (const auto& c : panel.countries) {
    if (std::find(est.data.dropped_countries.begin(), est.data.dropped_countries.end(), c.id) ==
        est.data.dropped_countries.end()) {
      countries.push_back(c.id);
    }
  }
  manifest["countries"] = countries;
  manifest["dropped_countries"] = est.data.dropped_countries;
  manifest["max_abs_target_impact"] = max_impact;
  manifest["degenerate_draws"] = g.analysis.degenerate_draws;
  const auto& shares = g.analysis.achieved_shares;
  manifest["mean_achieved_share"] =
      std::accumulate(shares.begin(), shares.end(), 0.0) / static_cast<double>(shares.size());
  for (const auto& v : cfg.variables) {
    const auto it = cfg.transforms.find(v);
    manifest["units"][v] = it != cfg.transforms.end() && it->second.log ? "log (x100 = percent)" : "model units";
  }
  manifest["decisions"] = modelling_decisions(cfg);
  manifest["outputs"] = {{"irf.csv", fnv1a_hex(irf_text)}, {"fevd.csv", fnv1a_hex(fevd_text)}};
  manifest["config"] = resolved;

  if (sim) {
    const auto truth = align_shocks(sim->shocks, cfg.dgp.news, est.data.row_index);
    const auto cols = indices_of(cfg.dgp.variables, cfg.variables);
    Eigen::MatrixXd true_irf(sim->true_irf.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      true_irf.col(static_cast<Eigen::Index>(j)) = sim->true_irf.col(static_cast<Eigen::Index>(cols[j]));
    }
    const auto& est_shocks = g.analysis.median_shock_series;
    g.recovery = recovery_metrics(g.analysis.irf, std::span(est_shocks.data(), static_cast<std::size_t>(est_shocks.size())),
                                  truth, true_irf);
    manifest["recovery"] = {{"shock_correlation", g.recovery->shock_correlation},
                            {"max_irf_deviation", g.recovery->max_irf_deviation},
                            {"band_coverage", g.recovery->band_coverage}};
    log << "[pbvar] " << label << ": shock correlation " << format_number(g.recovery->shock_correlation)
        << ", band coverage " << format_number(g.recovery->band_coverage) << '\n';
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  log << "[pbvar] " << label << ": wrote " << (dir / "irf.csv").string() << '\n';
  return g;
}

}  // namespace

RunOutcome run_pipeline(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  log << "[pbvar] prior tightness kappa = " << format_number(cfg.prior.kappa)
      << (cfg.prior.kappa == 0.2 ? " (benchmark); kappa = 1 is the looser robustness alternative\n"
                                 : " (non-benchmark override)\n");

  PanelDataset panel;
  std::optional<SimulatedPanel> sim;
  if (cfg.source == DataSource::simulator) {
    sim = simulate_panel(cfg.dgp);
    panel = select_variables(sim->panel, cfg.variables);
  } else {
    panel = load_model_panel(cfg, log);
  }

  RunOutcome outcome;
  if (cfg.groups.empty()) {
    outcome.groups.push_back(run_group(cfg, "", panel, sim ? &*sim : nullptr, cfg.output_dir, log));
  } else {
    for (const auto& group : cfg.groups) {
      const auto subset = select_countries(panel, group.countries);
      outcome.groups.push_back(
          run_group(cfg, group.name, subset, sim ? &*sim : nullptr, cfg.output_dir / group.name, log));
    }
  }
  return outcome;
}

SimulatedPanel simulate_to_disk(const RunConfig& cfg, std::ostream& log) {
  if (cfg.source != DataSource::simulator) throw InputError("simulate needs data.source = \"simulator\"");
  validate_dgp(cfg.dgp);
  auto sim = simulate_panel(cfg.dgp);
  std::filesystem::create_directories(cfg.output_dir);
  write_panel_csv(sim.panel, cfg.output_dir / "panel.csv");
  write_panel_csv(sim.shocks, cfg.output_dir / "shocks.csv");

  std::ostringstream irf_csv;
  irf_csv << "variable,horizon,value\n";
  for (Eigen::Index v = 0; v < sim.true_irf.cols(); ++v) {
    for (Eigen::Index h = 0; h < sim.true_irf.rows(); ++h) {
      irf_csv << cfg.dgp.variables[static_cast<std::size_t>(v)] << ',' << h << ',' << format_number(sim.true_irf(h, v))
              << '\n';
    }
  }
  write_file(cfg.output_dir / "true_irf.csv", irf_csv.str());
  log << "[pbvar] simulated " << sim.panel.countries.size() << " countries into " << cfg.output_dir.string() << '\n';
  return sim;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian panel VAR with news-shock identification", "pbvar"};
  app.require_subcommand(1);
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "estimate, identify and write irf.csv / fevd.csv / manifest.json");
  run_cmd->add_option("config", config_path, "run configuration (TOML)")->required();
  auto* validate_cmd = app.add_subcommand("validate", "check a configuration and list resolved settings");
  validate_cmd->add_option("config", config_path, "run configuration (TOML)")->required();
  auto* simulate_cmd = app.add_subcommand("simulate", "write a simulated panel and its true responses");
  simulate_cmd->add_option("config", config_path, "run configuration (TOML)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    const auto cfg = load_config(config_path);
    if (validate_cmd->parsed()) {
      validate_config(cfg);
      out << validation_report(cfg);
      out << "config OK\n";
    } else if (simulate_cmd->parsed()) {
      simulate_to_disk(cfg, err);
    } else {
      run_pipeline(cfg, err);
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error [" << e.where() << "]: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace pbvar
