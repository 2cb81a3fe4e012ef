#include "pbvar/analysis.hpp"

#include "pbvar/errors.hpp"
#include "pbvar/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace pbvar {

Eigen::MatrixXd irf(const MaCoefficients& psi, const StructuralShock& shock, std::size_t h_irf) {
  if (psi.horizon() < h_irf + 1) {
    throw InputError("IRF horizon " + std::to_string(h_irf) + " needs " + std::to_string(h_irf + 1) +
                     " MA matrices, have " + std::to_string(psi.horizon()));
  }
  if (shock.impact.size() != psi.n_vars()) throw InputError("shock and MA coefficients disagree on N");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(h_irf + 1), psi.n_vars());
  for (std::size_t j = 0; j <= h_irf; ++j) {
    out.row(static_cast<Eigen::Index>(j)) = (psi.psi[j] * shock.impact).transpose();
  }
  return out;
}

Eigen::MatrixXd irf(const PosteriorDraw& draw, const StructuralShock& shock, std::size_t n_lags, std::size_t h_irf) {
  return irf(ma_coefficients(draw.B, static_cast<std::size_t>(draw.omega.rows()), n_lags, h_irf + 1), shock, h_irf);
}

Eigen::MatrixXd fevd_table(const MaCoefficients& psi, const StructuralShock& shock, std::size_t max_horizon) {
  if (max_horizon < 1) throw InputError("FEVD horizon must be at least 1");
  if (psi.horizon() < max_horizon) throw InputError("FEVD horizon exceeds MA length");
  const Eigen::Index n = psi.n_vars();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(max_horizon), n);
  Eigen::ArrayXd num = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd den = Eigen::ArrayXd::Zero(n);
  for (std::size_t j = 0; j < max_horizon; ++j) {
    const Eigen::MatrixXd loaded = psi.psi[j] * shock.a_tilde;
    num += (psi.psi[j] * shock.impact).array().square();
    den += loaded.rowwise().squaredNorm().array();
    if ((den <= 0.0).any()) {
      throw NumericalError("analysis/fevd_share", "zero forecast error variance at horizon " + std::to_string(j + 1));
    }
    out.row(static_cast<Eigen::Index>(j)) = (num / den).min(1.0).transpose();
  }
  return out;
}

double fevd_share(const MaCoefficients& psi, const StructuralShock& shock, std::size_t variable, std::size_t horizon) {
  if (variable >= static_cast<std::size_t>(psi.n_vars())) throw InputError("variable index out of range");
  return fevd_table(psi, shock, horizon)(static_cast<Eigen::Index>(horizon) - 1, static_cast<Eigen::Index>(variable));
}

const Eigen::MatrixXd& QuantileTable::at(double prob) const {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (std::abs(probs[i] - prob) < 1e-12) return values[i];
  }
  throw InputError("probability " + format_number(prob) + " not in quantile table");
}

QuantileTable summarize(std::span<const Eigen::MatrixXd> draws, std::span<const double> probs) {
  if (draws.empty()) throw InputError("cannot summarize an empty draw stream");
  if (draws.size() < 2) throw InputError("summaries need at least 2 draws");
  if (probs.empty()) throw InputError("no quantile probabilities given");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) throw InputError("quantile probabilities must lie in [0, 1]");
    if (i > 0 && probs[i] < probs[i - 1]) throw InputError("quantile probabilities must be sorted");
  }
  const auto rows = draws.front().rows();
  const auto cols = draws.front().cols();
  for (const auto& d : draws) {
    if (d.rows() != rows || d.cols() != cols) throw InputError("draws differ in shape");
  }

  QuantileTable out;
  out.probs.assign(probs.begin(), probs.end());
  out.values.assign(probs.size(), Eigen::MatrixXd(rows, cols));

  const std::size_t n = draws.size();
  std::vector<double> cell(n);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (std::size_t d = 0; d < n; ++d) cell[d] = draws[d](r, c);
      for (std::size_t p = 0; p < probs.size(); ++p) {
        const double h = static_cast<double>(n - 1) * probs[p];
        const auto lo = static_cast<std::size_t>(std::floor(h));
        std::nth_element(cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(lo), cell.end());
        double v = cell[lo];
        if (lo + 1 < n && h > static_cast<double>(lo)) {
          const double next = *std::min_element(cell.begin() + static_cast<std::ptrdiff_t>(lo) + 1, cell.end());
          v += (h - static_cast<double>(lo)) * (next - v);
        }
        out.values[p](r, c) = v;
      }
    }
  }
  return out;
}

Eigen::VectorXd structural_shock_series(const RegressionData& data, const PosteriorDraw& draw,
                                        const StructuralShock& shock) {
  const Eigen::MatrixXd resid = data.Y - data.X * draw.B;
  const Eigen::VectorXd w = shock.a_tilde.transpose().triangularView<Eigen::Upper>().solve(shock.q);
  return resid * w;
}

AnalysisOutput analyze_draws(std::span<const PosteriorDraw> draws, const std::vector<std::string>& variables,
                             std::size_t n_lags, const IdentificationSettings& ident,
                             const AnalysisSettings& settings, const RegressionData* data) {
  if (draws.size() < 2) throw InputError("analysis needs at least 2 retained draws");
  const std::size_t n = variables.size();
  if (ident.target >= n) throw InputError("identification target out of range");
  const std::size_t h_ma = std::max(settings.irf_horizon + 1, ident.horizon);

  std::vector<Eigen::MatrixXd> irfs(draws.size());
  std::vector<Eigen::MatrixXd> fevds(draws.size());
  std::vector<Eigen::MatrixXd> shocks(data ? draws.size() : 0);
  std::vector<double> shares(draws.size());
  std::vector<double> impacts(draws.size());
  std::vector<char> degenerate(draws.size(), 0);

  parallel_for(draws.size(), settings.workers, [&](std::size_t i) {
    const auto& d = draws[i];
    const auto psi = ma_coefficients(d.B, n, n_lags, h_ma);
    StructuralShock shock;
    if (ident.orthogonal_to) {
      shock = identify_orthogonal_pair(psi, d.omega, *ident.orthogonal_to, ident.target, ident.horizon).second;
    } else {
      shock = identify_news_shock(psi, d.omega, ident.target, ident.horizon);
    }
    irfs[i] = irf(psi, shock, settings.irf_horizon);
    fevds[i] = fevd_table(psi, shock, std::max<std::size_t>(settings.irf_horizon, 1));
    shares[i] = shock.achieved_share;
    impacts[i] = shock.impact(static_cast<Eigen::Index>(ident.target));
    degenerate[i] = shock.degenerate ? 1 : 0;
    if (data) shocks[i] = structural_shock_series(*data, d, shock);
  });

  AnalysisOutput out;
  out.irf.variables = variables;
  out.irf.horizon = settings.irf_horizon;
  out.irf.bands = summarize(irfs, settings.probs);
  out.fevd.variables = variables;
  out.fevd.horizon = std::max<std::size_t>(settings.irf_horizon, 1);
  out.fevd.shares = summarize(fevds, settings.probs);
  out.achieved_shares = std::move(shares);
  out.target_impacts = std::move(impacts);
  out.degenerate_draws = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  if (data) {
    const double median = 0.5;
    out.median_shock_series = summarize(shocks, std::span(&median, 1)).values.front().col(0);
  }
  if (settings.retain_draws) out.irf.raw = std::move(irfs);
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void write_table(const std::vector<std::string>& variables, const QuantileTable& table, std::size_t first_horizon,
                 const char* value_name, std::ostream& out) {
  out << "variable,horizon,prob," << value_name << '\n';
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto rows = table.values.front().rows();
    for (Eigen::Index h = 0; h < rows; ++h) {
      for (std::size_t p = 0; p < table.probs.size(); ++p) {
        out << variables[v] << ',' << (first_horizon + static_cast<std::size_t>(h)) << ','
            << format_number(table.probs[p]) << ',' << format_number(table.values[p](h, static_cast<Eigen::Index>(v)))
            << '\n';
      }
    }
  }
}

}  // namespace

void write_irf_csv(const IrfResult& result, std::ostream& out) {
  write_table(result.variables, result.bands, 0, "value", out);
}

void write_fevd_csv(const FevdResult& result, std::ostream& out) {
  write_table(result.variables, result.shares, 1, "share", out);
}

}  // namespace pbvar
