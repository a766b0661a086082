#pragma once

#include "rmdg/analysis.hpp"
#include "rmdg/solver.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace rmdg {

/// Cell-wise localization of the test norm of eps_h. Interior-face jump
/// energy is split evenly between the two cells sharing the face, so the
/// squared indicators sum to eps^T G eps.
struct ErrorIndicatorField {
  std::vector<double> values;
  NormKind norm = NormKind::up();
  double total = 0.0;
};

ErrorIndicatorField compute_indicators(const AdvectionReactionProblem& problem,
                                       const FunctionSpace& test, const Eigen::VectorXd& eps,
                                       const NormKind& norm);

/// Smallest set of cells, taken by decreasing indicator (ties by index),
/// whose indicator energy reaches fraction^2 of the total.
std::vector<int> dorfler_mark(const ErrorIndicatorField& indicators, double fraction);

/// Nodal interpolation of a function on the parent mesh onto a mesh produced
/// by bisect_refine.
Eigen::VectorXd prolongate(const FunctionSpace& coarse, const Eigen::VectorXd& coeffs,
                           const FunctionSpace& fine);

enum class RefinementMode { uniform, adaptive };

RefinementMode parse_refinement_mode(const std::string& s);
std::string to_string(RefinementMode mode);

struct LevelRecord {
  int level = 0;
  int n_cells = 0;
  int dofs_trial = 0;
  int dofs_test = 0;
  int dofs_total = 0;
  double h_max = 0.0;
  double eps_norm = 0.0;
  ErrorReport ct;                   // u_h
  std::optional<ErrorReport> dt;    // theta_h, when computed
  std::optional<double> theta_minus_u_up;
  SaturationRecord saturation;
  ResidualReport residuals;
  SolverStats solver;
  int n_marked = 0;
};

struct AdaptiveTrace {
  std::vector<LevelRecord> levels;
};

/// Everything known about one level, handed to CascadeOptions::observer.
struct LevelView {
  const LevelRecord& record;
  const SimplicialMesh& mesh;
  const FunctionSpace& trial;
  const FunctionSpace& test;
  const SaddleSystem& system;
  const SaddleSolution& solution;
  const ErrorIndicatorField& indicators;
  const std::vector<int>& marked;
  const std::optional<Eigen::VectorXd>& theta;
};

struct CascadeOptions {
  RefinementMode mode = RefinementMode::adaptive;
  int degree = 1;
  NormKind norm = NormKind::up();
  double fraction = 0.5;
  int max_levels = 10;
  long dof_budget = std::numeric_limits<long>::max();
  int initial_n = 4;
  SolverConfig solver;
  bool warm_start = true;   // bank solver only, adaptive meshes only
  bool compute_dg = false;  // also solve for theta_h and record S, W
  std::function<void(const LevelView&)> observer;

  void validate() const;
};

/// SOLVE -> ESTIMATE -> MARK -> REFINE on the unit box, or uniform
/// refinement (n doubling) when mode is uniform. Stops after max_levels,
/// once a level reaches dof_budget, or when nothing is marked.
AdaptiveTrace adaptive_loop(const BenchmarkInstance& benchmark, const CascadeOptions& options);

const std::vector<std::string>& trace_csv_columns();
void write_trace_csv(const AdaptiveTrace& trace, std::ostream& os);

}  // namespace rmdg
