#include "pathclosure/runner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pathclosure/csvio.hpp"
#include "pathclosure/harmonic.hpp"
#include "pathclosure/lagrangian.hpp"
#include "pathclosure/paths.hpp"
#include "pathclosure/pde.hpp"
#include "pathclosure/transfer.hpp"
#include "pathclosure/version.hpp"
#include "pathclosure/weaknoise.hpp"

namespace pathclosure::runner {

namespace {

using config::RunConfig;

std::string provenance_line(const RunConfig& cfg, const std::string& raw) {
  std::ostringstream os;
  os << "pathclosure " << kVersion << " config=" << std::hex
     << csvio::fnv1a(raw) << std::dec << " seed=" << cfg.seed;
  return os.str();
}

GridSpec grid_from(const std::vector<double>& lo, const std::vector<double>& hi,
                   const std::vector<int>& pts, const std::string& what) {
  if (lo.size() != hi.size() || lo.size() != pts.size() || lo.empty()) {
    throw InvalidParameterError(what + ": lo/hi/points need equal nonzero sizes");
  }
  GridSpec g;
  for (std::size_t d = 0; d < lo.size(); ++d) {
    g.axes.push_back(GridAxis{lo[d], hi[d], pts[d]});
  }
  return g;
}

GridSpec run_grid(const RunConfig& cfg) {
  if (cfg.grid_lo.empty()) {
    throw InvalidParameterError("[grid] section required for this subcommand");
  }
  return grid_from(cfg.grid_lo, cfg.grid_hi, cfg.grid_points, "[grid]");
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

Vector lambda0_or_default(const RunConfig& cfg, int dim) {
  if (cfg.lambda0.empty()) {
    if (dim == 1) {
      Vector v(1);
      v << cfg.u0;
      return v;
    }
    return Vector::Zero(dim);
  }
  const Vector v = to_vector(cfg.lambda0);
  if (v.size() != dim) {
    throw InvalidParameterError("lambda0 dimension mismatch with provider");
  }
  return v;
}

std::vector<std::string> numbered(const std::string& stem, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + "_" + std::to_string(i));
  return out;
}

struct Emitter {
  std::filesystem::path dir;
  std::string provenance;
  std::vector<std::string>* files;

  csvio::CsvWriter open(const std::string& name) const {
    files->push_back(name);
    return csvio::CsvWriter(dir / name, provenance);
  }
};

// ---------------------------------------------------------------------------

RunResult run_geometry(const RunConfig& cfg, const Emitter& em,
                       const Workspace& ws) {
  const GridSpec grid = run_grid(cfg);
  const int m = ws.provider->dim();
  if (grid.dim() != m) {
    throw InvalidParameterError("geometry: [grid] dim != provider dim");
  }
  auto csv = em.open("geometry.csv");
  std::vector<std::string> head = numbered("lambda", m);
  for (const auto& s : numbered("a", m)) head.push_back(s);
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= m; ++j) {
      head.push_back("g_" + std::to_string(i) + std::to_string(j));
    }
  }
  for (const auto& s : numbered("M", m)) head.push_back(s);
  head.push_back("phi");
  const bool with_se = cfg.provider_type == "monte_carlo";
  if (with_se) {
    for (const auto& s : numbered("se_a", m)) head.push_back(s);
    for (const auto& s : numbered("se_M", m)) head.push_back(s);
    head.push_back("se_phi");
  }
  csv.header(head);
  for (int f = 0; f < grid.node_count(); ++f) {
    const Vector node = grid.node(f);
    const geometry::GeometryPoint p = ws.provider->at(node);
    std::vector<double> row;
    for (int d = 0; d < m; ++d) row.push_back(node[d]);
    for (int d = 0; d < m; ++d) row.push_back(p.a[d]);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) row.push_back(p.g(i, j));
    }
    for (int d = 0; d < m; ++d) row.push_back(p.M[d]);
    row.push_back(p.phi);
    if (with_se && p.se) {
      for (int d = 0; d < m; ++d) row.push_back(p.se->a[d]);
      for (int d = 0; d < m; ++d) row.push_back(p.se->M[d]);
      row.push_back(p.se->phi);
    }
    csv.row(row);
  }
  csv.close();
  return {};
}

RunResult run_identities(const RunConfig& cfg, const Emitter& em,
                         const Workspace& ws) {
  if (!ws.model) {
    throw InvalidParameterError("identities: needs a sampleable model "
                                "(oscillator or tbh)");
  }
  geometry::IdentityOptions opts;
  opts.count = cfg.identity_count;
  opts.seed = cfg.seed;
  opts.batches = cfg.mc_batches;
  const Vector lambda = lambda0_or_default(cfg, ws.model->resolved_dim());
  const geometry::IdentityReport report =
      geometry::identity_suite(*ws.model, lambda, cfg.beta, opts);

  auto csv = em.open("identities.csv");
  csv.header({"check", "deviation", "bound_3se", "pass"});
  for (const auto& c : report.checks) {
    csv.row_raw({c.name, csvio::format_double(c.value),
                 csvio::format_double(c.bound), c.pass ? "1" : "0"});
  }
  csv.close();
  RunResult r;
  r.message = report.all_pass() ? "all identities pass" : "identity failure";
  return r;
}

RunResult run_harmonic(const RunConfig& cfg, const Emitter& em) {
  harmonic::HarmonicSpec spec{cfg.kappa, cfg.u0, cfg.delta_t};
  const auto restart =
      harmonic::restart_experiment(spec, cfg.t_restart, cfg.horizon);

  {
    auto csv = em.open("fig2a.csv");
    csv.header({"t", "u_original", "u_restarted"});
    for (int i = 0; i < restart.original.nodes(); ++i) {
      const double t = restart.original.times[i];
      std::vector<std::string> cells = {
          csvio::format_double(t),
          csvio::format_double(restart.original.points(i, 0)), ""};
      if (t >= restart.t_restart - 1e-12) {
        const int j = static_cast<int>(
            std::lround((t - restart.t_restart) / 0.01));
        if (j >= 0 && j < restart.restarted.nodes()) {
          cells[2] = csvio::format_double(restart.restarted.points(j, 0));
        }
      }
      csv.row_raw(cells);
    }
    csv.close();
  }
  {
    auto csv = em.open("fig2b.csv");
    csv.header({"T", "uT", "psi"});
    const double lo = cfg.grid_lo.empty() ? -0.5 : cfg.grid_lo[0];
    const double hi = cfg.grid_hi.empty() ? 1.5 : cfg.grid_hi[0];
    const int pts = cfg.grid_points.empty() ? 401 : cfg.grid_points[0];
    const double h = (hi - lo) / (pts - 1);
    for (double T : cfg.weight_times) {
      for (int i = 0; i < pts; ++i) {
        const double u = lo + i * h;
        csv.row({T, u, harmonic::kernel_closed(spec, u, T)});
      }
    }
    csv.close();
  }
  {
    auto csv = em.open("fig3.csv");
    csv.header({"t", "u_thermo", "u_extremal"});
    const double T = cfg.horizon;
    const double uT = harmonic::thermo_path(spec, T);
    const int n = static_cast<int>(std::floor(T / 0.01 + 1e-9)) + 1;
    for (int i = 0; i < n; ++i) {
      const double t = i * 0.01;
      csv.row({t, harmonic::thermo_path(spec, t),
               harmonic::extremal_closed(spec, uT, T, t)});
    }
    csv.close();
  }
  return {};
}

RunResult run_extremal(const RunConfig& cfg, const Emitter& em,
                       const Workspace& ws) {
  lagrangian::LagrangianContext ctx{ws.provider.get(), cfg.delta_t, cfg.w_rev};
  const int m = ws.provider->dim();
  const Vector l0 = lambda0_or_default(cfg, m);
  if (cfg.lambda_target.empty()) {
    throw InvalidParameterError("extremal: lambda_target required");
  }
  const Vector lT = to_vector(cfg.lambda_target);
  paths::BvpOptions opts;
  opts.tol = cfg.tol;
  const paths::BvpSolution sol =
      paths::solve_extremal(ctx, l0, lT, cfg.horizon_t, cfg.n_nodes, opts);

  {
    auto csv = em.open("extremal.csv");
    std::vector<std::string> head = {"t"};
    for (const auto& s : numbered("lambda", m)) head.push_back(s);
    csv.header(head);
    for (int k = 0; k < sol.path.nodes(); ++k) {
      std::vector<double> row = {sol.path.times[k]};
      for (int d = 0; d < m; ++d) row.push_back(sol.path.points(k, d));
      csv.row(row);
    }
    csv.close();
  }
  {
    auto csv = em.open("extremal_summary.csv");
    csv.header({"converged", "iterations", "el_residual", "action"});
    csv.row_raw({sol.converged ? "1" : "0", std::to_string(sol.iterations),
                 csvio::format_double(sol.el_residual),
                 csvio::format_double(lagrangian::discrete_action(ctx, sol.path))});
    csv.close();
  }
  RunResult r;
  if (!sol.converged) {
    r.exit_code = kExitNoConvergence;
    r.message = "extremal solve did not converge";
  }
  return r;
}

RunResult run_closure(const RunConfig& cfg, const Emitter& em,
                      const Workspace& ws) {
  lagrangian::LagrangianContext ctx{ws.provider.get(), cfg.delta_t, cfg.w_rev};
  const int m = ws.provider->dim();
  const Vector l0 = lambda0_or_default(cfg, m);
  if (cfg.endpoint_lo.empty()) {
    throw InvalidParameterError("closure: endpoint_lo/hi/points required");
  }
  const GridSpec grid = grid_from(cfg.endpoint_lo, cfg.endpoint_hi,
                                  cfg.endpoint_points, "endpoint grid");
  const paths::ClosureResult res =
      paths::classical_closure(ctx, l0, cfg.horizon_t, grid, cfg.n_nodes);

  {
    auto csv = em.open("closure.csv");
    std::vector<std::string> head = numbered("lambda_T", m);
    head.push_back("S_m");
    head.push_back("valid");
    csv.header(head);
    for (int f = 0; f < grid.node_count(); ++f) {
      const Vector node = grid.node(f);
      std::vector<std::string> cells;
      for (int d = 0; d < m; ++d) cells.push_back(csvio::format_double(node[d]));
      cells.push_back(csvio::format_double(res.s_values[f]));
      cells.push_back(res.valid[f] ? "1" : "0");
      csv.row_raw(cells);
    }
    csv.close();
  }
  {
    auto csv = em.open("closure_summary.csv");
    std::vector<std::string> head = numbered("lambda_opt", m);
    head.push_back("S_opt");
    csv.header(head);
    std::vector<double> row;
    for (int d = 0; d < m; ++d) row.push_back(res.lambda_opt[d]);
    row.push_back(res.s_opt);
    csv.row(row);
    csv.close();
  }
  return {};
}

RunResult run_propagate(const RunConfig& cfg, const Emitter& em,
                        const Workspace& ws) {
  const GridSpec grid = run_grid(cfg);
  const transfer::TransferOperator op = transfer::build_transfer(
      *ws.provider, grid, cfg.delta_t, cfg.n_sub, cfg.w_rev);
  const Vector start = lambda0_or_default(cfg, grid.dim());
  transfer::ConsistencyField psi = transfer::ConsistencyField::delta(grid, start);

  auto summary = em.open("propagate_summary.csv");
  summary.header({"step", "time", "mass", "argmax"});
  for (int s = 0; s <= cfg.steps; ++s) {
    const double am = grid.dim() == 1 ? psi.argmax_refined()
                                      : std::numeric_limits<double>::quiet_NaN();
    summary.row({static_cast<double>(s), s * cfg.delta_t, psi.l1(), am});
    if (s < cfg.steps) psi.values = op.apply(psi.values);
  }
  summary.close();

  auto csv = em.open("propagate.csv");
  std::vector<std::string> head = numbered("lambda", grid.dim());
  head.push_back("psi");
  csv.header(head);
  for (int f = 0; f < grid.node_count(); ++f) {
    const Vector node = grid.node(f);
    std::vector<double> row;
    for (int d = 0; d < grid.dim(); ++d) row.push_back(node[d]);
    row.push_back(psi.values[f]);
    csv.row(row);
  }
  csv.close();
  return {};
}

RunResult run_steady(const RunConfig& cfg, const Emitter& em,
                     const Workspace& ws) {
  const GridSpec grid = run_grid(cfg);
  const transfer::TransferOperator op = transfer::build_transfer(
      *ws.provider, grid, cfg.delta_t, cfg.n_sub, cfg.w_rev);
  const transfer::SteadyStateResult res =
      transfer::steady_state(op, cfg.tol, cfg.max_iter, cfg.seed);

  {
    auto csv = em.open("steady.csv");
    std::vector<std::string> head = numbered("lambda", grid.dim());
    head.push_back("psi");
    csv.header(head);
    for (int f = 0; f < grid.node_count(); ++f) {
      const Vector node = grid.node(f);
      std::vector<double> row;
      for (int d = 0; d < grid.dim(); ++d) row.push_back(node[d]);
      row.push_back(res.psi.values[f]);
      csv.row(row);
    }
    csv.close();
  }
  {
    auto csv = em.open("steady_summary.csv");
    csv.header({"eigenvalue", "eigenvalue_per_unit_time", "iterations",
                "converged", "last_gap", "confinement_met"});
    csv.row_raw({csvio::format_double(res.eigenvalue),
                 csvio::format_double(res.eigenvalue_per_unit_time(cfg.delta_t)),
                 std::to_string(res.iterations), res.converged ? "1" : "0",
                 csvio::format_double(res.last_gap),
                 res.confinement_met ? "1" : "0"});
    csv.close();
  }
  if (cfg.spectrum) {
    auto csv = em.open("spectrum.csv");
    csv.header({"rank", "magnitude"});
    const auto mags = transfer::top_magnitudes(op, 5, cfg.seed);
    for (std::size_t i = 0; i < mags.size(); ++i) {
      csv.row({static_cast<double>(i + 1), mags[i]});
    }
    csv.close();
  }
  RunResult r;
  if (!res.converged) {
    r.exit_code = kExitNoConvergence;
    r.message = "power iteration hit max_iter; last gap " +
                csvio::format_double(res.last_gap);
  }
  return r;
}

RunResult run_weaknoise(const RunConfig& cfg, const Emitter& em,
                        const Workspace& ws) {
  const int m = ws.provider->dim();
  const Vector guess =
      cfg.lambda0.empty() ? Vector::Zero(m) : to_vector(cfg.lambda0);
  const weaknoise::GaugeSolution gauge =
      weaknoise::stationary_hj_quadratic(*ws.provider, guess);
  const Matrix sigma = weaknoise::stationary_covariance(gauge, cfg.delta_t);
  Vector start = cfg.lambda_target.empty() ? Vector::Constant(m, cfg.u0)
                                           : to_vector(cfg.lambda_target);
  const Path alpha = weaknoise::drift_ode_solve(*ws.provider, gauge, start,
                                                cfg.horizon_t, cfg.ode_dt);
  const Path hat = weaknoise::ottinger_path(*ws.provider, gauge, sigma, start,
                                            cfg.horizon_t, cfg.ode_dt);

  {
    auto csv = em.open("weaknoise_paths.csv");
    std::vector<std::string> head = {"t"};
    for (const auto& s : numbered("alpha", m)) head.push_back(s);
    for (const auto& s : numbered("lambda_hat", m)) head.push_back(s);
    csv.header(head);
    for (int k = 0; k < alpha.nodes(); ++k) {
      std::vector<double> row = {alpha.times[k]};
      for (int d = 0; d < m; ++d) row.push_back(alpha.points(k, d));
      for (int d = 0; d < m; ++d) row.push_back(hat.points(k, d));
      csv.row(row);
    }
    csv.close();
  }
  {
    auto csv = em.open("weaknoise_summary.csv");
    csv.header({"quantity", "index", "value"});
    Eigen::EigenSolver<Matrix> es(gauge.drift_lin);
    for (int d = 0; d < m; ++d) {
      csv.row_raw({"alpha_star", std::to_string(d + 1),
                   csvio::format_double(gauge.alpha_star[d])});
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
        csv.row_raw({"G", ij, csvio::format_double(gauge.G(i, j))});
        csv.row_raw({"sigma", ij, csvio::format_double(sigma(i, j))});
      }
    }
    for (int d = 0; d < m; ++d) {
      csv.row_raw({"drift_eig_re", std::to_string(d + 1),
                   csvio::format_double(es.eigenvalues()[d].real())});
      csv.row_raw({"drift_eig_im", std::to_string(d + 1),
                   csvio::format_double(es.eigenvalues()[d].imag())});
    }
    csv.close();
  }
  return {};
}

RunResult run_pde_check(const RunConfig& cfg, const Emitter& em,
                        const Workspace& ws) {
  const GridSpec grid = run_grid(cfg);
  std::vector<int> n_subs = {5, 10, 20, 40};
  const auto cmp = pde::compare_with_transfer(*ws.provider, grid, cfg.delta_t,
                                              n_subs, cfg.horizon_t, cfg.u0);
  auto csv = em.open("pde_check.csv");
  csv.header({"n_sub", "dt_sub", "l1_gap", "order"});
  for (std::size_t i = 0; i < cmp.n_sub_values.size(); ++i) {
    std::vector<std::string> cells = {
        std::to_string(cmp.n_sub_values[i]),
        csvio::format_double(cmp.dt_values[i]),
        csvio::format_double(cmp.l1_gaps[i]),
        i < cmp.orders.size() ? csvio::format_double(cmp.orders[i]) : ""};
    csv.row_raw(cells);
  }
  csv.close();
  auto summary = em.open("pde_check_summary.csv");
  summary.header({"min_order", "pde_rate", "transfer_rate", "rate_gap_rel"});
  summary.row({cmp.min_order, cmp.pde_rate, cmp.transfer_rate, cmp.rate_gap_rel});
  summary.close();
  return {};
}

RunResult run_appendix_b(const RunConfig& cfg, const Emitter& em,
                         const Workspace& ws) {
  const GridSpec grid = run_grid(cfg);
  const transfer::TransferOperator op = transfer::build_transfer(
      *ws.provider, grid, cfg.delta_t, cfg.n_sub, cfg.w_rev);
  const auto rep = transfer::appendix_b_diagnostics(op, cfg.trials, cfg.seed,
                                                    cfg.confinement_factor);
  auto csv = em.open("appendix_b.csv");
  csv.header({"metric", "value", "pass"});
  csv.row_raw({"max_l1_ratio", csvio::format_double(rep.max_l1_ratio),
               rep.contraction_pass ? "1" : "0"});
  csv.row_raw({"tail_fraction", csvio::format_double(rep.tail_fraction),
               rep.tail_warning ? "0" : "1"});
  csv.row_raw({"translation_modulus",
               csvio::format_double(rep.translation_modulus), ""});
  csv.row_raw({"boundary_il_rev", csvio::format_double(rep.boundary_il_rev), ""});
  csv.row_raw({"median_il_rev", csvio::format_double(rep.median_il_rev), ""});
  csv.row_raw({"confinement_met", rep.confinement_met ? "1" : "0",
               rep.confinement_met ? "1" : "0"});
  csv.close();
  return {};
}

}  // namespace

Workspace make_workspace(const config::RunConfig& cfg) {
  Workspace ws;
  if (cfg.model_type == "harmonic") {
    ws.provider = std::make_unique<geometry::HarmonicSurrogateProvider>(cfg.kappa);
    return ws;
  }
  if (cfg.model_type == "free") {
    ws.provider = std::make_unique<geometry::FreeSurrogateProvider>();
    return ws;
  }

  std::unique_ptr<geometry::GeometryProvider> closed;
  if (cfg.model_type == "oscillator") {
    ws.model = std::make_shared<models::OscillatorModel>();
    closed = std::make_unique<geometry::OscillatorClosedFormProvider>(cfg.beta);
  } else if (cfg.model_type == "tbh") {
    if (cfg.tbh_k_res > cfg.tbh_trunc) {
      throw InvalidParameterError("tbh: k_res must be <= trunc");
    }
    auto tbh = std::make_shared<models::TbhModel>(cfg.tbh_trunc, cfg.tbh_k_res);
    ws.model = tbh;
    closed = std::make_unique<geometry::TbhGaussianProvider>(tbh, cfg.beta);
  } else {
    throw InvalidParameterError("unknown model type " + cfg.model_type);
  }

  if (cfg.provider_type == "closed_form") {
    ws.provider = std::move(closed);
  } else if (cfg.provider_type == "monte_carlo") {
    geometry::McOptions opts;
    opts.count = cfg.mc_count;
    opts.seed = cfg.seed;
    opts.batches = cfg.mc_batches;
    ws.provider = std::make_unique<geometry::MonteCarloProvider>(ws.model, opts,
                                                                 cfg.beta);
  } else {
    if (cfg.table_lo.empty()) {
      throw InvalidParameterError("tabulated provider: table_lo/hi/points required");
    }
    const GridSpec table = grid_from(cfg.table_lo, cfg.table_hi, cfg.table_points,
                                     "[provider] table");
    ws.provider = std::make_unique<geometry::TabulatedProvider>(*closed, table);
  }
  return ws;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "geometry", "identities", "harmonic",  "extremal",  "closure",
      "propagate", "steady",     "weaknoise", "pde-check", "appendix-b"};
  return names;
}

RunResult run_subcommand(const std::string& subcommand,
                         const config::RunConfig& cfg,
                         const std::string& raw_config_text,
                         const std::filesystem::path& out_dir) {
  RunResult result;
  std::filesystem::create_directories(out_dir);
  Emitter em{out_dir, provenance_line(cfg, raw_config_text), &result.files};
  try {
    if (subcommand == "harmonic") {
      RunResult r = run_harmonic(cfg, em);
      r.files = result.files;
      return r;
    }
    const Workspace ws = make_workspace(cfg);
    RunResult r;
    if (subcommand == "geometry") {
      r = run_geometry(cfg, em, ws);
    } else if (subcommand == "identities") {
      r = run_identities(cfg, em, ws);
    } else if (subcommand == "extremal") {
      r = run_extremal(cfg, em, ws);
    } else if (subcommand == "closure") {
      r = run_closure(cfg, em, ws);
    } else if (subcommand == "propagate") {
      r = run_propagate(cfg, em, ws);
    } else if (subcommand == "steady") {
      r = run_steady(cfg, em, ws);
    } else if (subcommand == "weaknoise") {
      r = run_weaknoise(cfg, em, ws);
    } else if (subcommand == "pde-check") {
      r = run_pde_check(cfg, em, ws);
    } else if (subcommand == "appendix-b") {
      r = run_appendix_b(cfg, em, ws);
    } else {
      result.exit_code = kExitValidation;
      result.message = "unknown subcommand '" + subcommand + "'";
      return result;
    }
    r.files = result.files;
    return r;
  } catch (const InvalidParameterError& e) {
    result.exit_code = kExitValidation;
    result.message = e.what();
  } catch (const GridMismatchError& e) {
    result.exit_code = kExitValidation;
    result.message = e.what();
  } catch (const BoundaryWarningError& e) {
    result.exit_code = kExitValidation;
    result.message = e.what();
  } catch (const UnsupportedCurvatureError& e) {
    result.exit_code = kExitValidation;
    result.message = e.what();
  } catch (const TimeStepStabilityError& e) {
    result.exit_code = kExitValidation;
    result.message = e.what();
  } catch (const RangeOverflowError& e) {
    result.exit_code = kExitValidation;
    result.message = e.what();
  } catch (const Error& e) {
    result.exit_code = kExitNoConvergence;
    result.message = e.what();
  }
  return result;
}

}  // namespace pathclosure::runner
