#pragma once

#include "rmdg/adapt.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rmdg {

/// Flat experiment description; read from `key = value` files.
struct ExperimentConfig {
  std::string benchmark = "tanh2d";
  double M = 5.0;
  int degree = 1;
  std::string norm = "up";
  std::optional<double> eta;       // default 1 for up, forced 0 for cf
  RefinementMode mode = RefinementMode::uniform;
  std::optional<double> fraction;  // default 0.5 in 2D, 0.25 in 3D
  int max_levels = 5;
  std::optional<long> dof_budget;  // default 200k in 2D, 500k in 3D
  int initial_n = 4;
  SolverMode solver = SolverMode::direct;
  double cg_tol = 1e-10;
  int cg_max_iter = 2000;
  int outer_iters = 1;
  bool schur_preconditioner = true;
  bool compare_dg = false;
  bool dump_meshes = false;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "rmdg_out";

  /// Throws ConfigError on unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  int dim() const;
  NormKind norm_kind() const;
  CascadeOptions cascade_options() const;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(const ExperimentConfig& config, std::ostream& os);

struct InvariantCheck {
  std::string name;
  int level = 0;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

struct ExperimentResult {
  AdaptiveTrace trace;
  std::vector<InvariantCheck> checks;
  bool all_passed() const;
};

/// Runs the cascade, writing trace.csv, summary.txt, solver_stats.txt and,
/// with dump_meshes, mesh_<level>.txt into output_dir. Files are rewritten
/// after every level so a failure keeps the completed levels on disk.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Runs both configurations into <out>/uniform and <out>/adaptive and writes
/// <out>/compare.csv aligning (dofs, error) of the two runs.
struct ComparisonRow {
  int row = 0;
  std::optional<double> uniform_dofs, uniform_err, adaptive_dofs, adaptive_err;
  std::optional<double> uniform_err_at_adaptive_dofs;
};

std::vector<ComparisonRow> compare_traces(const AdaptiveTrace& uniform,
                                          const AdaptiveTrace& adaptive, bool up_norm);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, std::ostream& os);

std::vector<ComparisonRow> compare_modes(const ExperimentConfig& first,
                                         const ExperimentConfig& second,
                                         const std::filesystem::path& out_dir);

/// Log-log interpolation of error against dofs; nullopt outside the range.
std::optional<double> interpolate_loglog(const std::vector<double>& dofs,
                                         const std::vector<double>& errors, double at);

}  // namespace rmdg
