#include "rmdg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace rmdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (!is || !is.eof()) throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + value + "' for key '" + key + "'");
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  return os;
}

void write_summary(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::filesystem::path& path) {
  auto os = open_output(path);
  os << "# configuration\n";
  write_config(config, os);
  os << "\n# fitted rates (least squares over the last 3 levels, log error vs log dofs)\n";
  const auto& levels = result.trace.levels;
  os << "levels = " << levels.size() << '\n';
  if (levels.size() >= 2) {
    std::vector<double> dofs, dg_dofs;
    for (const auto& r : levels) {
      dofs.push_back(r.dofs_total);
      dg_dofs.push_back(r.dofs_test);
    }
    auto report = [&](const std::string& name, const std::vector<double>& x, auto get) {
      std::vector<double> y;
      for (const auto& r : levels) y.push_back(get(r));
      if (std::any_of(y.begin(), y.end(), [](double v) { return !(v > 0.0); })) {
        os << name << " = n/a\n";
        return;
      }
      const auto rates = convergence_rates(x, y, 3);
      os << name << "_dof_rate = " << rates.fitted;
      os << "  h_rate = " << -config.dim() * rates.fitted << '\n';
    };
    report("err_L2", dofs, [](const LevelRecord& r) { return r.ct.err_L2; });
    report("err_cf", dofs, [](const LevelRecord& r) { return r.ct.err_cf; });
    report("err_up", dofs, [](const LevelRecord& r) { return r.ct.err_up; });
    report("eps_norm", dofs, [](const LevelRecord& r) { return r.eps_norm; });
    if (levels.front().dt) {
      report("dg_err_L2", dg_dofs, [](const LevelRecord& r) { return r.dt->err_L2; });
      report("dg_err_up", dg_dofs, [](const LevelRecord& r) { return r.dt->err_up; });
    }
  }
  os << "\n# invariant checks\n";
  for (const auto& c : result.checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " level=" << c.level
       << " value=" << c.value << " limit=" << c.limit << '\n';
  os << "all_checks = " << (result.all_passed() ? "PASS" : "FAIL") << '\n';
}

void write_solver_stats(const AdaptiveTrace& trace, const std::filesystem::path& path) {
  auto os = open_output(path);
  for (const auto& r : trace.levels)
    os << "level=" << r.level << " dofs_total=" << r.dofs_total
       << " cg_iterations=" << r.solver.cg_iterations
       << " outer_iterations=" << r.solver.outer_iterations
       << " cg_relative_residual=" << r.solver.cg_relative_residual
       << " factor_seconds=" << r.solver.factor_seconds
       << " solve_seconds=" << r.solver.solve_seconds << '\n';
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "benchmark") benchmark = value;
  else if (key == "M") M = parse_number<double>(key, value);
  else if (key == "degree") degree = parse_number<int>(key, value);
  else if (key == "norm") norm = value;
  else if (key == "eta") eta = parse_number<double>(key, value);
  else if (key == "mode") mode = parse_refinement_mode(value);
  else if (key == "fraction") fraction = parse_number<double>(key, value);
  else if (key == "max_levels") max_levels = parse_number<int>(key, value);
  else if (key == "dof_budget") dof_budget = parse_number<long>(key, value);
  else if (key == "initial_n") initial_n = parse_number<int>(key, value);
  else if (key == "solver") solver = parse_solver_mode(value);
  else if (key == "cg_tol") cg_tol = parse_number<double>(key, value);
  else if (key == "cg_max_iter") cg_max_iter = parse_number<int>(key, value);
  else if (key == "outer_iters") outer_iters = parse_number<int>(key, value);
  else if (key == "schur_preconditioner") schur_preconditioner = parse_bool(key, value);
  else if (key == "compare_dg") compare_dg = parse_bool(key, value);
  else if (key == "dump_meshes") dump_meshes = parse_bool(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "output_dir") output_dir = value;
  else throw ConfigError("unknown configuration key '" + key + "'");
}

int ExperimentConfig::dim() const {
  return parse_benchmark_label(benchmark) == BenchmarkLabel::tanh2d ? 2 : 3;
}

NormKind ExperimentConfig::norm_kind() const {
  if (norm == "cf") {
    if (eta && *eta != 0.0) throw ConfigError("the cf norm has no penalty (eta must be 0)");
    return NormKind::cf();
  }
  if (norm == "up") return NormKind::up(eta.value_or(1.0));
  throw ConfigError("unknown norm '" + norm + "' (expected cf or up)");
}

void ExperimentConfig::validate() const {
  parse_benchmark_label(benchmark);
  if (!(M > 0.0)) throw ConfigError("M must be positive");
  if (degree != 1 && degree != 2) throw ConfigError("degree must be 1 or 2");
  norm_kind();
  if (fraction && !(*fraction > 0.0 && *fraction <= 1.0))
    throw ConfigError("fraction must be in (0, 1]");
  if (max_levels < 1) throw ConfigError("max_levels must be at least 1");
  if (dof_budget && *dof_budget < 1) throw ConfigError("dof_budget must be positive");
  if (initial_n < 1) throw ConfigError("initial_n must be at least 1");
  if (!(cg_tol > 0.0) || cg_max_iter < 1 || outer_iters < 1)
    throw ConfigError("solver tolerances and iteration counts must be positive");
}

CascadeOptions ExperimentConfig::cascade_options() const {
  validate();
  CascadeOptions o;
  o.mode = mode;
  o.degree = degree;
  o.norm = norm_kind();
  o.fraction = fraction.value_or(dim() == 2 ? 0.5 : 0.25);
  o.max_levels = max_levels;
  o.dof_budget = dof_budget.value_or(dim() == 2 ? 200000 : 500000);
  o.initial_n = initial_n;
  o.solver.mode = solver;
  o.solver.cg_tol = cg_tol;
  o.solver.cg_max_iter = cg_max_iter;
  o.solver.outer_iters = outer_iters;
  o.solver.preconditioned = schur_preconditioner;
  o.compute_dg = compare_dg;
  return o;
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration file " + path.string());
  return parse_config(is);
}

void write_config(const ExperimentConfig& c, std::ostream& os) {
  os << "benchmark = " << c.benchmark << '\n'
     << "M = " << c.M << '\n'
     << "degree = " << c.degree << '\n'
     << "norm = " << c.norm << '\n';
  if (c.eta) os << "eta = " << *c.eta << '\n';
  os << "mode = " << to_string(c.mode) << '\n';
  if (c.fraction) os << "fraction = " << *c.fraction << '\n';
  os << "max_levels = " << c.max_levels << '\n';
  if (c.dof_budget) os << "dof_budget = " << *c.dof_budget << '\n';
  os << "initial_n = " << c.initial_n << '\n'
     << "solver = " << to_string(c.solver) << '\n'
     << "cg_tol = " << c.cg_tol << '\n'
     << "cg_max_iter = " << c.cg_max_iter << '\n'
     << "outer_iters = " << c.outer_iters << '\n'
     << "schur_preconditioner = " << (c.schur_preconditioner ? "true" : "false") << '\n'
     << "compare_dg = " << (c.compare_dg ? "true" : "false") << '\n'
     << "dump_meshes = " << (c.dump_meshes ? "true" : "false") << '\n'
     << "seed = " << c.seed << '\n';
}

bool ExperimentResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  CascadeOptions options = config.cascade_options();
  const auto benchmark = make_benchmark(config.benchmark, config.M);
  std::filesystem::create_directories(config.output_dir);

  ExperimentResult result;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  auto flush = [&] {
    auto csv = open_output(config.output_dir / "trace.csv");
    write_trace_csv(result.trace, csv);
    write_solver_stats(result.trace, config.output_dir / "solver_stats.txt");
    write_summary(config, result, config.output_dir / "summary.txt");
  };

  options.observer = [&](const LevelView& view) {
    const auto& r = view.record;
    const auto& res = r.residuals;
    auto check = [&](std::string name, double value, double limit) {
      result.checks.push_back({std::move(name), r.level, value, limit, value <= limit});
    };
    check("orthogonality |B^T eps|_inf / |l|_inf", res.orthogonality_inf / res.load_inf, 1e-9);
    check("energy identity |eps^T G eps - l^T eps| / eps^T G eps",
          std::abs(res.eps_energy - res.load_dot_eps) / res.eps_energy, 1e-9);
    check("a priori bound |eps| - |l|_*", r.eps_norm - res.load_dual_norm, 0.0);

    // Indicator localization on a random test function.
    Eigen::VectorXd v(view.test.n_dofs());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    const auto ind = compute_indicators(benchmark.problem, view.test, v, options.norm);
    const double energy = v.dot(view.system.G * v);
    check("indicator sum |sum E_K^2 - v^T G v| / v^T G v",
          std::abs(ind.total * ind.total - energy) / energy, 1e-12);

    result.trace.levels.push_back(r);
    if (config.dump_meshes) {
      auto os = open_output(config.output_dir / ("mesh_" + std::to_string(r.level) + ".txt"));
      view.mesh.write(os);
    }
    flush();
  };

  const auto trace = adaptive_loop(benchmark, options);
  result.trace = trace;
  flush();
  return result;
}

std::optional<double> interpolate_loglog(const std::vector<double>& dofs,
                                         const std::vector<double>& errors, double at) {
  for (std::size_t i = 0; i + 1 < dofs.size(); ++i) {
    const double a = dofs[i], b = dofs[i + 1];
    if (at < std::min(a, b) || at > std::max(a, b)) continue;
    if (a == b) return errors[i];
    const double t = std::log(at / a) / std::log(b / a);
    return std::exp((1.0 - t) * std::log(errors[i]) + t * std::log(errors[i + 1]));
  }
  if (dofs.size() == 1 && dofs[0] == at) return errors[0];
  return std::nullopt;
}

std::vector<ComparisonRow> compare_traces(const AdaptiveTrace& uniform,
                                          const AdaptiveTrace& adaptive, bool up_norm) {
  auto err = [up_norm](const LevelRecord& r) { return up_norm ? r.ct.err_up : r.ct.err_cf; };
  std::vector<double> ud, ue;
  for (const auto& r : uniform.levels) {
    ud.push_back(r.dofs_total);
    ue.push_back(err(r));
  }
  std::vector<ComparisonRow> rows;
  const std::size_t n = std::max(uniform.levels.size(), adaptive.levels.size());
  for (std::size_t i = 0; i < n; ++i) {
    ComparisonRow row;
    row.row = static_cast<int>(i);
    if (i < uniform.levels.size()) {
      row.uniform_dofs = uniform.levels[i].dofs_total;
      row.uniform_err = err(uniform.levels[i]);
    }
    if (i < adaptive.levels.size()) {
      row.adaptive_dofs = adaptive.levels[i].dofs_total;
      row.adaptive_err = err(adaptive.levels[i]);
      row.uniform_err_at_adaptive_dofs = interpolate_loglog(ud, ue, *row.adaptive_dofs);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& os) {
  os << "row,uniform_dofs,uniform_err,adaptive_dofs,adaptive_err,uniform_err_at_adaptive_dofs\n";
  auto opt = [&os](const std::optional<double>& v) {
    if (!v) return;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    os << buf;
  };
  for (const auto& r : rows) {
    os << r.row << ',';
    opt(r.uniform_dofs);
    os << ',';
    opt(r.uniform_err);
    os << ',';
    opt(r.adaptive_dofs);
    os << ',';
    opt(r.adaptive_err);
    os << ',';
    opt(r.uniform_err_at_adaptive_dofs);
    os << '\n';
  }
}

std::vector<ComparisonRow> compare_modes(const ExperimentConfig& first,
                                         const ExperimentConfig& second,
                                         const std::filesystem::path& out_dir) {
  first.validate();
  second.validate();
  if (first.benchmark != second.benchmark || first.M != second.M ||
      first.degree != second.degree || first.norm != second.norm)
    throw ConfigError("compared runs must share benchmark, M, degree and norm");

  const bool distinct = first.mode != second.mode;
  ExperimentConfig a = first, b = second;
  a.output_dir = out_dir / (distinct ? to_string(a.mode) : std::string("run1"));
  b.output_dir = out_dir / (distinct ? to_string(b.mode) : std::string("run2"));
  const auto ra = run_experiment(a);
  const auto rb = run_experiment(b);
  const bool a_uniform = !distinct || a.mode == RefinementMode::uniform;
  const auto rows = a_uniform ? compare_traces(ra.trace, rb.trace, first.norm == "up")
                              : compare_traces(rb.trace, ra.trace, first.norm == "up");
  auto os = open_output(out_dir / "compare.csv");
  write_comparison_csv(rows, os);
  return rows;
}

}  // namespace rmdg
