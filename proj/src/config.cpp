#include "pbvar/config.hpp"

#include "pbvar/errors.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace pbvar {

namespace {

void check_keys(const toml::table& t, std::string_view where, std::initializer_list<std::string_view> allowed) {
  for (auto&& [key, node] : t) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      throw InputError("config: unknown key '" + std::string(key.str()) + "' in [" + std::string(where) + "]");
    }
  }
}

const toml::table* sub_table(const toml::table& t, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw InputError("config: '" + std::string(key) + "' must be a table");
  return node->as_table();
}

std::string key_path(std::string_view table, std::string_view key) {
  return std::string(table) + "." + std::string(key);
}

std::optional<double> get_double(const toml::table& t, std::string_view table, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value<double>()) return v;
  throw InputError("config: " + key_path(table, key) + " must be a number");
}

std::optional<std::int64_t> get_int(const toml::table& t, std::string_view table, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_integer()) return node->as_integer()->get();
  throw InputError("config: " + key_path(table, key) + " must be an integer");
}

std::optional<std::size_t> get_count(const toml::table& t, std::string_view table, std::string_view key) {
  const auto v = get_int(t, table, key);
  if (!v) return std::nullopt;
  if (*v < 0) throw InputError("config: " + key_path(table, key) + " must be non-negative");
  return static_cast<std::size_t>(*v);
}

std::optional<std::string> get_string(const toml::table& t, std::string_view table, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value<std::string>()) return v;
  throw InputError("config: " + key_path(table, key) + " must be a string");
}

std::optional<bool> get_bool(const toml::table& t, std::string_view table, std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_boolean()) return node->as_boolean()->get();
  throw InputError("config: " + key_path(table, key) + " must be true or false");
}

std::vector<std::string> strings_of(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr) throw InputError("config: " + where + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& el : *arr) {
    auto s = el.value<std::string>();
    if (!s) throw InputError("config: " + where + " must be an array of strings");
    out.push_back(*s);
  }
  return out;
}

std::optional<std::vector<std::string>> get_strings(const toml::table& t, std::string_view table,
                                                    std::string_view key) {
  const auto* node = t.get(key);
  if (!node) return std::nullopt;
  return strings_of(*node, key_path(table, key));
}

std::vector<double> doubles_of(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr) throw InputError("config: " + where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& el : *arr) {
    auto v = el.value<double>();
    if (!v) throw InputError("config: " + where + " must be an array of numbers");
    out.push_back(*v);
  }
  return out;
}

Eigen::MatrixXd matrix_of(const toml::node& node, const std::string& where) {
  const auto* arr = node.as_array();
  if (!arr || arr->empty()) throw InputError("config: " + where + " must be a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& el : *arr) rows.push_back(doubles_of(el, where));
  const auto cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InputError("config: " + where + " rows differ in length");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

void parse_simulator(const toml::table& t, RunConfig& cfg) {
  check_keys(t, "simulator", {"preset", "countries", "years", "first_year", "seed", "fixed_effect_sd", "burn_in",
                              "delay", "variables", "target", "news", "impact", "lags"});
  const auto preset = get_string(t, "simulator", "preset").value_or("desk");
  if (preset == "desk") {
    cfg.dgp = desk_scale_dgp();
  } else if (preset == "benchmark") {
    cfg.dgp = benchmark_scale_dgp();
  } else {
    throw InputError("config: simulator.preset must be 'desk' or 'benchmark'");
  }
  auto& d = cfg.dgp;
  if (auto v = get_count(t, "simulator", "countries")) d.n_countries = *v;
  if (auto v = get_count(t, "simulator", "years")) d.n_years = *v;
  if (auto v = get_int(t, "simulator", "first_year")) d.first_year = static_cast<int>(*v);
  if (auto v = get_count(t, "simulator", "seed")) d.seed = *v;
  if (auto v = get_double(t, "simulator", "fixed_effect_sd")) d.fixed_effect_sd = *v;
  if (auto v = get_count(t, "simulator", "burn_in")) d.burn_in = *v;
  if (auto v = get_count(t, "simulator", "delay")) d.delay = *v;
  if (auto v = get_strings(t, "simulator", "variables")) d.variables = *v;
  if (const auto* node = t.get("impact")) d.impact = matrix_of(*node, "simulator.impact");
  if (const auto* node = t.get("lags")) {
    const auto* arr = node->as_array();
    if (!arr || arr->empty()) throw InputError("config: simulator.lags must be an array of matrices");
    d.lags.clear();
    for (const auto& el : *arr) d.lags.push_back(matrix_of(el, "simulator.lags"));
  }
  if (auto v = get_string(t, "simulator", "target")) {
    d.target = index_of(d.variables, *v);
    if (d.target >= d.variables.size()) throw InputError("config: simulator.target '" + *v + "' is not a variable");
  }
  if (auto v = get_string(t, "simulator", "news")) {
    d.news = index_of(d.variables, *v);
    if (d.news >= d.variables.size()) throw InputError("config: simulator.news '" + *v + "' is not a variable");
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view stem) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " (line " << e.source().begin.line << ")";
    throw InputError(os.str());
  }
  check_keys(root, "root",
             {"data", "transforms", "simulator", "model", "prior", "identification", "sampler", "analysis", "groups",
              "output"});

  RunConfig cfg;
  if (const auto* t = sub_table(root, "data")) {
    check_keys(*t, "data", {"source", "path", "columns", "variables"});
    const auto source = get_string(*t, "data", "source").value_or("csv");
    if (source == "csv") {
      cfg.source = DataSource::csv;
    } else if (source == "simulator") {
      cfg.source = DataSource::simulator;
    } else {
      throw InputError("config: data.source must be 'csv' or 'simulator'");
    }
    if (auto v = get_string(*t, "data", "path")) cfg.data_path = resolve(base_dir, *v);
    if (auto v = get_strings(*t, "data", "columns")) cfg.columns = *v;
    if (auto v = get_strings(*t, "data", "variables")) cfg.variables = *v;
  }

  if (const auto* t = sub_table(root, "transforms")) {
    for (auto&& [key, node] : *t) {
      const std::string name(key.str());
      if (!node.is_table()) throw InputError("config: transforms." + name + " must be a table");
      const auto& tt = *node.as_table();
      const auto where = "transforms." + name;
      check_keys(tt, where, {"deflate_by", "per_capita_by", "log"});
      VariableTransform tf;
      tf.deflate_by = get_string(tt, where, "deflate_by");
      tf.per_capita_by = get_string(tt, where, "per_capita_by");
      tf.log = get_bool(tt, where, "log").value_or(false);
      cfg.transforms.emplace(name, std::move(tf));
    }
  }

  if (cfg.source == DataSource::simulator) {
    if (const auto* t = sub_table(root, "simulator")) {
      parse_simulator(*t, cfg);
    } else {
      cfg.dgp = desk_scale_dgp();
    }
    if (cfg.variables.empty()) cfg.variables = cfg.dgp.variables;
  } else if (sub_table(root, "simulator")) {
    throw InputError("config: [simulator] requires data.source = \"simulator\"");
  }

  if (const auto* t = sub_table(root, "model")) {
    check_keys(*t, "model", {"lags"});
    if (auto v = get_count(*t, "model", "lags")) cfg.lags = *v;
  }

  if (const auto* t = sub_table(root, "prior")) {
    check_keys(*t, "prior", {"kappa", "c", "tau_soc", "s_floor_scale"});
    if (auto v = get_double(*t, "prior", "kappa")) cfg.prior.kappa = *v;
    if (auto v = get_double(*t, "prior", "c")) cfg.prior.c = *v;
    cfg.prior.tau_soc = get_double(*t, "prior", "tau_soc").value_or(10.0 * cfg.prior.kappa);
    if (auto v = get_double(*t, "prior", "s_floor_scale")) cfg.prior.s_floor_scale = *v;
  }

  if (const auto* t = sub_table(root, "identification")) {
    check_keys(*t, "identification", {"target", "horizon", "mode", "orthogonal_to"});
    if (auto v = get_string(*t, "identification", "target")) cfg.target = *v;
    if (auto v = get_count(*t, "identification", "horizon")) cfg.horizon = *v;
    const auto mode = get_string(*t, "identification", "mode").value_or("single");
    if (mode == "single") {
      cfg.mode = IdentificationMode::single;
    } else if (mode == "orthogonal_pair") {
      cfg.mode = IdentificationMode::orthogonal_pair;
    } else {
      throw InputError("config: identification.mode must be 'single' or 'orthogonal_pair'");
    }
    if (auto v = get_string(*t, "identification", "orthogonal_to")) cfg.orthogonal_to = *v;
  }
  if (cfg.target.empty() && cfg.source == DataSource::simulator) cfg.target = cfg.dgp.variables.at(cfg.dgp.target);

  if (const auto* t = sub_table(root, "sampler")) {
    check_keys(*t, "sampler", {"n_draws", "n_burn", "seed", "workers"});
    if (auto v = get_count(*t, "sampler", "n_draws")) cfg.sampler.n_draws = *v;
    if (auto v = get_count(*t, "sampler", "n_burn")) cfg.sampler.n_burn = *v;
    if (auto v = get_count(*t, "sampler", "seed")) cfg.sampler.seed = *v;
    if (auto v = get_count(*t, "sampler", "workers")) cfg.sampler.workers = *v;
  }

  if (const auto* t = sub_table(root, "analysis")) {
    check_keys(*t, "analysis", {"irf_horizon", "probs"});
    if (auto v = get_count(*t, "analysis", "irf_horizon")) cfg.irf_horizon = *v;
    if (const auto* node = t->get("probs")) cfg.probs = doubles_of(*node, "analysis.probs");
  }

  if (const auto* t = sub_table(root, "groups")) {
    for (auto&& [key, node] : *t) {
      cfg.groups.push_back({std::string(key.str()), strings_of(node, "groups." + std::string(key.str()))});
    }
  }

  if (const auto* t = sub_table(root, "output")) {
    check_keys(*t, "output", {"dir", "write_draws"});
    if (auto v = get_string(*t, "output", "dir")) cfg.output_dir = resolve(base_dir, *v);
    if (auto v = get_bool(*t, "output", "write_draws")) cfg.write_draws = *v;
  }
  if (cfg.output_dir.empty()) {
    const char* root_env = std::getenv("PBVAR_OUTPUT_ROOT");
    const std::filesystem::path out_root = root_env && *root_env ? root_env : "pbvar-out";
    cfg.output_dir = out_root / std::string(stem);
  }

  if (cfg.columns.empty() && cfg.source == DataSource::csv) {
    cfg.columns = cfg.variables;
    const auto add = [&](const std::string& c) {
      if (std::find(cfg.columns.begin(), cfg.columns.end(), c) == cfg.columns.end()) cfg.columns.push_back(c);
    };
    for (const auto& [name, tf] : cfg.transforms) {
      add(name);
      if (tf.deflate_by) add(*tf.deflate_by);
      if (tf.per_capita_by) add(*tf.per_capita_by);
    }
  }
  cfg.dgp.irf_horizon = cfg.irf_horizon;
  cfg.dgp.workers = cfg.sampler.workers;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return parse_config(ss.str(), base, path.stem().string());
}

void validate_config(const RunConfig& cfg) {
  const auto fail = [](const std::string& msg) { throw InputError("config: " + msg); };
  const auto& vars = cfg.variables;
  const auto has = [](const std::vector<std::string>& names, const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };

  if (vars.empty()) fail("data.variables is empty");
  if (std::set<std::string>(vars.begin(), vars.end()).size() != vars.size()) fail("data.variables has duplicates");
  if (cfg.lags < 1) fail("model.lags must be at least 1");
  if (!(cfg.prior.kappa > 0.0)) fail("prior.kappa must be positive");
  if (!(cfg.prior.c > 0.0)) fail("prior.c must be positive");
  if (!(cfg.prior.tau_soc > 0.0)) fail("prior.tau_soc must be positive");
  if (!(cfg.prior.s_floor_scale > 0.0)) fail("prior.s_floor_scale must be positive");

  if (cfg.target.empty()) fail("identification.target is required (name of the news-shock target variable)");
  if (!has(vars, cfg.target)) fail("identification.target '" + cfg.target + "' is not one of data.variables");
  if (cfg.horizon < 1) fail("identification.horizon must be at least 1");
  if (cfg.mode == IdentificationMode::orthogonal_pair) {
    if (cfg.orthogonal_to.empty()) fail("identification.orthogonal_to is required in orthogonal_pair mode");
    if (!has(vars, cfg.orthogonal_to)) fail("identification.orthogonal_to '" + cfg.orthogonal_to + "' is not a variable");
    if (cfg.orthogonal_to == cfg.target) fail("identification.orthogonal_to must differ from the target");
    if (vars.size() < 3) fail("orthogonal_pair mode needs at least 3 variables");
  } else if (!cfg.orthogonal_to.empty()) {
    fail("identification.orthogonal_to is only valid in orthogonal_pair mode");
  }

  if (cfg.sampler.n_draws <= cfg.sampler.n_burn) fail("sampler.n_draws must exceed sampler.n_burn");
  if (cfg.sampler.retained() < 2) fail("sampler must retain at least 2 draws");
  if (cfg.sampler.workers < 1) fail("sampler.workers must be at least 1");
  if (cfg.irf_horizon < 1) fail("analysis.irf_horizon must be at least 1");
  if (cfg.probs.empty()) fail("analysis.probs is empty");
  for (std::size_t i = 0; i < cfg.probs.size(); ++i) {
    if (!(cfg.probs[i] > 0.0 && cfg.probs[i] < 1.0)) fail("analysis.probs must lie strictly inside (0, 1)");
    if (i > 0 && !(cfg.probs[i] > cfg.probs[i - 1])) fail("analysis.probs must be strictly increasing");
  }
  if (std::none_of(cfg.probs.begin(), cfg.probs.end(), [](double p) { return std::abs(p - 0.5) < 1e-12; })) {
    fail("analysis.probs must include the median 0.5");
  }

  std::set<std::string> group_names;
  for (const auto& g : cfg.groups) {
    if (!group_names.insert(g.name).second) fail("duplicate group '" + g.name + "'");
    if (g.countries.empty()) fail("group '" + g.name + "' is empty");
  }

  std::vector<std::string> country_ids;
  if (cfg.source == DataSource::simulator) {
    if (!cfg.transforms.empty()) fail("[transforms] apply to CSV data only");
    validate_dgp(cfg.dgp);
    for (const auto& v : vars) {
      if (!has(cfg.dgp.variables, v)) fail("variable '" + v + "' is not produced by the simulator");
    }
    auto dgp = cfg.dgp;
    dgp.n_years = 1;
    dgp.burn_in = 0;
    dgp.spans.clear();
    for (const auto& c : simulate_panel(dgp).panel.countries) country_ids.push_back(c.id);
  } else {
    if (cfg.data_path.empty()) fail("data.path is required for CSV data");
    for (const auto& v : vars) {
      if (!has(cfg.columns, v)) fail("variable '" + v + "' is not listed in data.columns");
    }
    for (const auto& [name, tf] : cfg.transforms) {
      if (!has(cfg.columns, name)) fail("transform target '" + name + "' is not a data column");
      if (tf.deflate_by && !has(cfg.columns, *tf.deflate_by)) fail("deflator '" + *tf.deflate_by + "' is not a column");
      if (tf.per_capita_by && !has(cfg.columns, *tf.per_capita_by)) {
        fail("population '" + *tf.per_capita_by + "' is not a column");
      }
    }
    const auto panel = load_panel(cfg.data_path, cfg.columns, cfg.lags);
    for (const auto& c : panel.countries) country_ids.push_back(c.id);
  }
  for (const auto& g : cfg.groups) {
    for (const auto& c : g.countries) {
      if (!has(country_ids, c)) fail("group '" + g.name + "' lists unknown country '" + c + "'");
    }
  }
}

std::vector<std::string> modelling_decisions(const RunConfig& cfg) {
  std::vector<std::string> d;
  std::ostringstream kappa;
  kappa << "prior tightness kappa = " << format_number(cfg.prior.kappa)
        << (cfg.prior.kappa == 0.2 ? " (benchmark value; 1 is the looser robustness setting)"
                                   : " (override of the 0.2 benchmark value)");
  d.push_back(kappa.str());
  d.push_back("sum-of-coefficients tightness tau = " + format_number(cfg.prior.tau_soc) +
              (std::abs(cfg.prior.tau_soc - 10.0 * cfg.prior.kappa) < 1e-12 ? " (10 * kappa)" : " (explicit)"));
  d.push_back("inverse-Wishart degrees of freedom = augmented rows - K + 2");
  d.push_back("posterior sampling is exact i.i.d. Monte Carlo; burn-in draws are skipped, not simulated");
  d.push_back("AR(1) prior regressions include an intercept and pool within-country lag pairs across countries");
  d.push_back("sum-of-coefficients mean mu is the pooled sample mean");
  d.push_back("AR(1) residual sd floored at s_floor_scale * max(1, max|z|) with s_floor_scale = " +
              format_number(cfg.prior.s_floor_scale));
  d.push_back("fixed effects: one dummy per country, time dummies for every usable year except the first");
  d.push_back("unbalanced panels: only rows with complete lag windows are stacked; interior year gaps are rejected");
  d.push_back("transform order: deflate -> per-capita -> log");
  d.push_back("impact factor: lower Cholesky factor of Omega, shock re-identified on every draw");
  d.push_back("FEV denominator fixed at the target's total H-step forecast error variance (Rayleigh quotient)");
  d.push_back("sign: target response positive at the first horizon where it is nonzero");
  d.push_back("horizon H sums Psi_0..Psi_{H-1}");
  d.push_back("bands: pointwise empirical quantiles with linear interpolation");
  d.push_back("IRFs in model units; log-transformed variables read as percent after multiplying by 100");
  return d;
}

std::string validation_report(const RunConfig& cfg) {
  std::ostringstream os;
  const auto list = [](const std::vector<std::string>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
    return s + "]";
  };
  os << "resolved configuration\n";
  os << "  data.source = " << (cfg.source == DataSource::csv ? "csv" : "simulator") << '\n';
  if (cfg.source == DataSource::csv) os << "  data.path = " << cfg.data_path.string() << '\n';
  os << "  data.variables = " << list(cfg.variables) << '\n';
  for (const auto& [name, tf] : cfg.transforms) {
    os << "  transforms." << name << " =";
    if (tf.deflate_by) os << " deflate_by:" << *tf.deflate_by;
    if (tf.per_capita_by) os << " per_capita_by:" << *tf.per_capita_by;
    if (tf.log) os << " log";
    if (tf.is_passthrough()) os << " passthrough";
    os << '\n';
  }
  if (cfg.source == DataSource::simulator) {
    os << "  simulator.countries = " << cfg.dgp.n_countries << '\n';
    os << "  simulator.years = " << cfg.dgp.n_years << '\n';
    os << "  simulator.delay = " << cfg.dgp.delay << '\n';
    os << "  simulator.seed = " << cfg.dgp.seed << '\n';
  }
  os << "  model.lags = " << cfg.lags << '\n';
  os << "  prior.kappa = " << format_number(cfg.prior.kappa) << '\n';
  os << "  prior.c = " << format_number(cfg.prior.c) << '\n';
  os << "  prior.tau_soc = " << format_number(cfg.prior.tau_soc) << '\n';
  os << "  prior.s_floor_scale = " << format_number(cfg.prior.s_floor_scale) << '\n';
  os << "  identification.target = " << cfg.target << '\n';
  os << "  identification.horizon = " << cfg.horizon << '\n';
  os << "  identification.mode = " << (cfg.mode == IdentificationMode::single ? "single" : "orthogonal_pair") << '\n';
  if (cfg.mode == IdentificationMode::orthogonal_pair) os << "  identification.orthogonal_to = " << cfg.orthogonal_to << '\n';
  os << "  sampler.n_draws = " << cfg.sampler.n_draws << '\n';
  os << "  sampler.n_burn = " << cfg.sampler.n_burn << '\n';
  os << "  sampler.seed = " << cfg.sampler.seed << '\n';
  os << "  sampler.workers = " << cfg.sampler.workers << '\n';
  os << "  analysis.irf_horizon = " << cfg.irf_horizon << '\n';
  os << "  analysis.probs = [";
  for (std::size_t i = 0; i < cfg.probs.size(); ++i) os << (i ? ", " : "") << format_number(cfg.probs[i]);
  os << "]\n";
  for (const auto& g : cfg.groups) os << "  groups." << g.name << " = " << list(g.countries) << '\n';
  os << "  output.dir = " << cfg.output_dir.string() << '\n';
  os << "modelling decisions\n";
  for (const auto& d : modelling_decisions(cfg)) os << "  - " << d << '\n';
  return os.str();
}

nlohmann::json resolved_config_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["data"]["source"] = cfg.source == DataSource::csv ? "csv" : "simulator";
  j["data"]["variables"] = cfg.variables;
  j["data"]["columns"] = cfg.columns;
  for (const auto& [name, tf] : cfg.transforms) {
    auto& t = j["transforms"][name];
    t["deflate_by"] = tf.deflate_by.value_or("");
    t["per_capita_by"] = tf.per_capita_by.value_or("");
    t["log"] = tf.log;
  }
  if (cfg.source == DataSource::simulator) {
    auto& s = j["simulator"];
    s["variables"] = cfg.dgp.variables;
    s["target"] = cfg.dgp.target;
    s["news"] = cfg.dgp.news;
    s["delay"] = cfg.dgp.delay;
    s["countries"] = cfg.dgp.n_countries;
    s["years"] = cfg.dgp.n_years;
    s["first_year"] = cfg.dgp.first_year;
    s["fixed_effect_sd"] = cfg.dgp.fixed_effect_sd;
    s["burn_in"] = cfg.dgp.burn_in;
    s["seed"] = cfg.dgp.seed;
    const auto mat = [](const Eigen::MatrixXd& m) {
      std::vector<std::vector<double>> rows;
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        auto& row = rows.emplace_back();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
      }
      return rows;
    };
    s["impact"] = mat(cfg.dgp.impact);
    for (const auto& a : cfg.dgp.lags) s["lags"].push_back(mat(a));
  }
  j["model"]["lags"] = cfg.lags;
  j["prior"] = {{"kappa", cfg.prior.kappa},
                {"c", cfg.prior.c},
                {"tau_soc", cfg.prior.tau_soc},
                {"s_floor_scale", cfg.prior.s_floor_scale}};
  j["identification"] = {{"target", cfg.target},
                         {"horizon", cfg.horizon},
                         {"mode", cfg.mode == IdentificationMode::single ? "single" : "orthogonal_pair"},
                         {"orthogonal_to", cfg.orthogonal_to}};
  j["sampler"] = {{"n_draws", cfg.sampler.n_draws}, {"n_burn", cfg.sampler.n_burn}, {"seed", cfg.sampler.seed}};
  j["analysis"] = {{"irf_horizon", cfg.irf_horizon}, {"probs", cfg.probs}};
  for (const auto& g : cfg.groups) j["groups"][g.name] = g.countries;
  return j;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pbvar
