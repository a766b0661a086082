// Command line driver: run one cascade or compare two.

#include <CLI11.hpp>

#include "rmdg/experiment.hpp"

#include <fstream>
#include <iostream>

namespace {

void apply_overrides(rmdg::ExperimentConfig& config, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw rmdg::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

void print_trace(const rmdg::AdaptiveTrace& trace) {
  std::printf("%5s %9s %10s %12s %12s %12s %12s\n", "level", "cells", "dofs", "eps", "err_L2",
              "err_cf", "err_up");
  for (const auto& r : trace.levels)
    std::printf("%5d %9d %10ld %12.4e %12.4e %12.4e %12.4e\n", r.level, r.n_cells,
                static_cast<long>(r.dofs_total), r.eps_norm, r.ct.err_L2, r.ct.err_cf,
                r.ct.err_up);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual minimization with discontinuous test spaces for advection-reaction"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::filesystem::path out;
  std::vector<std::string> sets;
  bool dump_meshes = false;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--set", sets, "Override a configuration key (key=value)");
    sub->add_flag("--dump-meshes", dump_meshes, "Write mesh_<level>.txt for every level");
    sub->add_option("--seed", seed, "Seed for randomized checks");
  };

  auto* run = app.add_subcommand("run", "Run one refinement cascade");
  run->add_option("--config", configs, "Configuration file")->required()->expected(1);
  add_common(run);

  auto* compare = app.add_subcommand("compare", "Run two cascades and align their errors by dofs");
  compare->add_option("--config", configs, "Configuration files (uniform, adaptive)")
      ->required()
      ->expected(2);
  add_common(compare);

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<rmdg::ExperimentConfig> parsed;
    for (const auto& path : configs) {
      auto c = rmdg::load_config(path);
      apply_overrides(c, sets);
      if (dump_meshes) c.dump_meshes = true;
      if (seed) c.seed = *seed;
      c.validate();
      parsed.push_back(std::move(c));
    }

    if (*run) {
      auto& c = parsed.front();
      if (!out.empty()) c.output_dir = out;
      const auto result = rmdg::run_experiment(c);
      print_trace(result.trace);
      for (const auto& chk : result.checks)
        if (!chk.passed)
          std::fprintf(stderr, "check failed: %s at level %d (%g > %g)\n", chk.name.c_str(),
                       chk.level, chk.value, chk.limit);
      std::printf("output written to %s\n", c.output_dir.string().c_str());
      return result.all_passed() ? 0 : 1;
    }

    const auto dir = out.empty() ? std::filesystem::path("rmdg_compare") : out;
    const auto rows = rmdg::compare_modes(parsed[0], parsed[1], dir);
    std::printf("%4s %10s %12s %10s %12s %12s\n", "row", "u_dofs", "u_err", "a_dofs", "a_err",
                "u_err@a");
    auto f = [](const std::optional<double>& v) { return v ? *v : std::nan(""); };
    for (const auto& r : rows)
      std::printf("%4d %10.0f %12.4e %10.0f %12.4e %12.4e\n", r.row, f(r.uniform_dofs),
                  f(r.uniform_err), f(r.adaptive_dofs), f(r.adaptive_err),
                  f(r.uniform_err_at_adaptive_dofs));
    std::printf("output written to %s\n", dir.string().c_str());
    return 0;
  } catch (const rmdg::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
