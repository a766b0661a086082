#pragma once

#include "rmdg/common.hpp"
#include "rmdg/mesh.hpp"

#include <functional>
#include <optional>
#include <string>

namespace rmdg {

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;

struct ExactSolution {
  ScalarField value;
  VectorField gradient;  // may be empty
};

/// b . grad u + gamma u = f in the unit box, u = g on the inflow boundary.
struct AdvectionReactionProblem {
  int dim = 2;
  VectorField velocity;
  ScalarField reaction;
  ScalarField source;
  ScalarField inflow;
  std::optional<ExactSolution> exact;
};

enum class BenchmarkLabel { tanh2d, spiral3d };

struct BenchmarkInstance {
  AdvectionReactionProblem problem;
  double M = 0.0;
  BenchmarkLabel label = BenchmarkLabel::tanh2d;
};

BenchmarkLabel parse_benchmark_label(const std::string& s);
std::string to_string(BenchmarkLabel label);

/// tanh2d: b = (3, 1), u = 1 + tanh(M (x2 - x1/3 - 1/2)).
/// spiral3d: helical transport of a tube of radius 0.15 around
/// (X1(x3), X2(x3)), two turns over the unit cube height.
BenchmarkInstance make_benchmark(BenchmarkLabel label, double M);
BenchmarkInstance make_benchmark(const std::string& label, double M);

/// Layer limit of the tanh2d solution as M grows: 1 + sign(x2 - x1/3 - 1/2).
double tanh2d_limit(const Vec& x);

/// Spiral centerline (X1(x3), X2(x3)).
std::pair<double, double> spiral_center(double x3);

/// (|x| - x) / 2
constexpr double negative_part(double x) { return 0.5 * ((x < 0 ? -x : x) - x); }

enum class BoundaryKind { inflow, outflow, characteristic };

constexpr double kCharacteristicTol = 1e-14;

BoundaryKind classify_boundary(const AdvectionReactionProblem& problem, const Face& face,
                               const Vec& x);

}  // namespace rmdg
