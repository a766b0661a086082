#include "rmdg/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace rmdg {

ErrorIndicatorField compute_indicators(const AdvectionReactionProblem& problem,
                                       const FunctionSpace& test, const Eigen::VectorXd& eps,
                                       const NormKind& norm) {
  if (test.kind() != SpaceKind::broken) throw SpaceError("indicators need the broken test space");
  if (eps.size() != test.n_dofs()) throw SpaceError("coefficient vector size mismatch");
  const auto& mesh = test.mesh();
  const int dim = mesh.dim();
  const int nl = test.n_local();
  std::vector<double> sq(mesh.n_cells(), 0.0);

  CellValues cv(test, volume_quadrature_degree(test.degree()));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    cv.reinit(c);
    const auto dofs = test.cell_dofs(c);
    const double h = mesh.geometry(c).diameter;
    for (int q = 0; q < cv.n_points(); ++q) {
      double e = 0.0;
      Vec g = Vec::Zero(dim);
      for (int i = 0; i < nl; ++i) {
        e += eps[dofs[i]] * cv.value(q, i);
        if (norm.is_up()) g += eps[dofs[i]] * cv.gradient(q, i).transpose();
      }
      double s = e * e;
      if (norm.is_up()) {
        const double be = problem.velocity(cv.point(q)).dot(g);
        s += h * be * be;
      }
      sq[c] += cv.JxW(q) * s;
    }
  }

  FaceValues plus(test, face_quadrature_degree(test.degree()));
  FaceValues minus(test, face_quadrature_degree(test.degree()));
  auto trace = [&](const FaceValues& fv, int cell, int q) {
    const auto dofs = test.cell_dofs(cell);
    double v = 0.0;
    for (int i = 0; i < nl; ++i) v += eps[dofs[i]] * fv.value(q, i);
    return v;
  };
  for (const auto& face : mesh.boundary_faces()) {
    plus.reinit(face, face.plus_cell);
    for (int q = 0; q < plus.n_points(); ++q) {
      const double e = trace(plus, face.plus_cell, q);
      const double bn = problem.velocity(plus.point(q)).dot(face.normal);
      sq[face.plus_cell] += 0.5 * plus.JxW(q) * std::abs(bn) * e * e;
    }
  }
  if (norm.is_up() && norm.eta() != 0.0) {
    for (const auto& face : mesh.interior_faces()) {
      const int kp = face.plus_cell, km = *face.minus_cell;
      plus.reinit(face, kp);
      minus.reinit(face, km);
      double energy = 0.0;
      for (int q = 0; q < plus.n_points(); ++q) {
        const double j = trace(plus, kp, q) - trace(minus, km, q);
        const double bn = problem.velocity(plus.point(q)).dot(face.normal);
        energy += 0.5 * norm.eta() * plus.JxW(q) * std::abs(bn) * j * j;
      }
      sq[kp] += 0.5 * energy;
      sq[km] += 0.5 * energy;
    }
  }

  ErrorIndicatorField out;
  out.norm = norm;
  out.values.resize(sq.size());
  double total = 0.0;
  for (std::size_t c = 0; c < sq.size(); ++c) {
    out.values[c] = std::sqrt(sq[c]);
    total += sq[c];
  }
  out.total = std::sqrt(total);
  return out;
}

std::vector<int> dorfler_mark(const ErrorIndicatorField& indicators, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("marking fraction must be in (0, 1]");
  const auto& e = indicators.values;
  std::vector<int> order(e.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return e[a] > e[b]; });

  double total = 0.0;
  for (int c : order) total += e[c] * e[c];
  std::vector<int> marked;
  if (!(total > 0.0)) return marked;
  const double target = fraction * fraction * total;
  double acc = 0.0;
  for (int c : order) {
    if (acc >= target) break;
    acc += e[c] * e[c];
    marked.push_back(c);
  }
  return marked;
}

Eigen::VectorXd prolongate(const FunctionSpace& coarse, const Eigen::VectorXd& coeffs,
                           const FunctionSpace& fine) {
  const auto& fmesh = fine.mesh();
  const auto& parents = fmesh.parents();
  if (static_cast<int>(parents.size()) != fmesh.n_cells())
    throw SpaceError("prolongation needs a mesh produced by bisection");
  if (fmesh.generation() != coarse.mesh().generation() + 1 ||
      std::any_of(parents.begin(), parents.end(),
                  [&](int p) { return p < 0 || p >= coarse.mesh().n_cells(); }))
    throw SpaceError("prolongation needs the mesh one bisection step below the coarse mesh");
  if (coarse.degree() != fine.degree() || coarse.kind() != fine.kind())
    throw SpaceError("prolongation between different space types");
  Eigen::VectorXd out(fine.n_dofs());
  const auto& nodes = fine.basis().nodes();
  for (int k = 0; k < fmesh.n_cells(); ++k) {
    const auto dofs = fine.cell_dofs(k);
    const auto verts = fmesh.cell_vertices(k);
    for (int i = 0; i < fine.n_local(); ++i) {
      Vec x = Vec::Zero(fmesh.dim());
      for (int v = 0; v <= fmesh.dim(); ++v) x += nodes[i][v] * fmesh.vertex(verts[v]);
      out[dofs[i]] = evaluate(coarse, coeffs, parents[k], x);
    }
  }
  return out;
}

RefinementMode parse_refinement_mode(const std::string& s) {
  if (s == "uniform") return RefinementMode::uniform;
  if (s == "adaptive") return RefinementMode::adaptive;
  throw ConfigError("unknown refinement mode '" + s + "'");
}

std::string to_string(RefinementMode mode) {
  return mode == RefinementMode::uniform ? "uniform" : "adaptive";
}

void CascadeOptions::validate() const {
  if (degree != 1 && degree != 2) throw ConfigError("degree must be 1 or 2");
  if (mode == RefinementMode::adaptive && !(fraction > 0.0 && fraction <= 1.0))
    throw ConfigError("marking fraction must be in (0, 1]");
  if (max_levels < 1) throw ConfigError("max_levels must be at least 1");
  if (initial_n < 1) throw ConfigError("initial_n must be at least 1");
  solver.validate();
}

AdaptiveTrace adaptive_loop(const BenchmarkInstance& benchmark, const CascadeOptions& options) {
  options.validate();
  const auto& problem = benchmark.problem;
  const int dim = problem.dim;
  const double up_eta = options.norm.is_up() ? options.norm.eta() : 1.0;

  AdaptiveTrace trace;
  auto mesh = std::make_shared<const SimplicialMesh>(build_structured_mesh(dim, options.initial_n));
  int n = options.initial_n;
  std::optional<SaddleGuess> guess;

  for (int level = 0; level < options.max_levels; ++level) {
    const auto trial = build_space(mesh, SpaceKind::conforming, options.degree);
    const auto test = build_space(mesh, SpaceKind::broken, options.degree);
    const SaddleSystem system = assemble_saddle(problem, trial, test, options.norm);
    const bool use_guess = guess && options.warm_start &&
                           options.solver.mode == SolverMode::bank_iterative;
    const SaddleSolution sol = solve_saddle(system, options.solver,
                                            use_guess ? guess : std::optional<SaddleGuess>{});

    LevelRecord rec;
    rec.level = level;
    rec.n_cells = mesh->n_cells();
    rec.dofs_trial = trial.n_dofs();
    rec.dofs_test = test.n_dofs();
    rec.dofs_total = rec.dofs_trial + rec.dofs_test;
    for (int c = 0; c < mesh->n_cells(); ++c)
      rec.h_max = std::max(rec.h_max, mesh->geometry(c).diameter);
    rec.eps_norm = sol.residuals.eps_norm();
    rec.residuals = sol.residuals;
    rec.solver = sol.stats;
    rec.ct = error_report(problem, trial, sol.u, up_eta);

    std::optional<Eigen::VectorXd> theta;
    if (options.compute_dg) {
      theta = solve_dg_primal(problem, test, options.norm);
      rec.dt = error_report(problem, test, *theta, up_eta);
      const Eigen::VectorXd gap = *theta - embed_conforming(trial, test, sol.u);
      rec.theta_minus_u_up = norm_terms(problem, test, gap, nullptr, up_eta).up();
      rec.saturation = saturation_from_norms(rec.dt->err_up, rec.ct.err_up, *rec.theta_minus_u_up);
    }

    const auto indicators = compute_indicators(problem, test, sol.eps, options.norm);
    const bool last = level + 1 == options.max_levels || rec.dofs_total >= options.dof_budget;
    std::vector<int> marked;
    if (!last && options.mode == RefinementMode::adaptive)
      marked = dorfler_mark(indicators, options.fraction);
    rec.n_marked = static_cast<int>(marked.size());
    trace.levels.push_back(rec);

    if (options.observer)
      options.observer(LevelView{trace.levels.back(), *mesh, trial, test, system, sol, indicators,
                                 marked, theta});
    if (last) break;

    if (options.mode == RefinementMode::uniform) {
      n *= 2;
      mesh = std::make_shared<const SimplicialMesh>(build_structured_mesh(dim, n));
      guess.reset();
      continue;
    }
    if (marked.empty()) break;
    auto refined = std::make_shared<const SimplicialMesh>(bisect_refine(*mesh, marked));
    const auto fine_trial = build_space(refined, SpaceKind::conforming, options.degree);
    const auto fine_test = build_space(refined, SpaceKind::broken, options.degree);
    guess = SaddleGuess{prolongate(test, sol.eps, fine_test), prolongate(trial, sol.u, fine_trial)};
    mesh = std::move(refined);
  }
  return trace;
}

const std::vector<std::string>& trace_csv_columns() {
  static const std::vector<std::string> cols{"level",   "n_cells",   "dofs_trial", "dofs_test",
                                             "dofs_total", "eps_norm", "err_L2",   "err_cf",
                                             "err_up",  "ratio_S",   "ratio_W"};
  return cols;
}

void write_trace_csv(const AdaptiveTrace& trace, std::ostream& os) {
  const auto& cols = trace_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  auto num = [&os](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  auto opt = [&](const std::optional<double>& v) {
    if (v) num(*v);
    else os << "nan";
  };
  for (const auto& r : trace.levels) {
    os << r.level << ',' << r.n_cells << ',' << r.dofs_trial << ',' << r.dofs_test << ','
       << r.dofs_total << ',';
    num(r.eps_norm);
    os << ',';
    num(r.ct.err_L2);
    os << ',';
    num(r.ct.err_cf);
    os << ',';
    num(r.ct.err_up);
    os << ',';
    opt(r.saturation.S);
    os << ',';
    opt(r.saturation.W);
    os << '\n';
  }
}

}  // namespace rmdg
