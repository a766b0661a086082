#include "rmdg/problem.hpp"

#include <cmath>
#include <numbers>

namespace rmdg {

namespace {

constexpr double kRadius = 0.15;
constexpr double kTurnRate = 4.0 * std::numbers::pi;

double sech2_tanh(double t, double& th) {
  th = std::tanh(t);
  return 1.0 - th * th;
}

AdvectionReactionProblem tanh2d(double M) {
  AdvectionReactionProblem p;
  p.dim = 2;
  p.velocity = [](const Vec&) {
    Vec b(2);
    b << 3.0, 1.0;
    return b;
  };
  p.reaction = [](const Vec&) { return 0.0; };
  p.source = [](const Vec&) { return 0.0; };
  auto u = [M](const Vec& x) { return 1.0 + std::tanh(M * (x[1] - x[0] / 3.0 - 0.5)); };
  auto grad = [M](const Vec& x) {
    double th = 0.0;
    const double s2 = sech2_tanh(M * (x[1] - x[0] / 3.0 - 0.5), th);
    Vec g(2);
    g << -M * s2 / 3.0, M * s2;
    return g;
  };
  p.inflow = u;
  p.exact = ExactSolution{u, grad};
  return p;
}

AdvectionReactionProblem spiral3d(double M) {
  AdvectionReactionProblem p;
  p.dim = 3;
  // Tangential speed matches the centerline pitch so that u is transported
  // along the helix: dX/dx3 = (-0.15 * 4 pi sin, 0.15 * 4 pi cos).
  p.velocity = [](const Vec& x) {
    Vec b(3);
    b << -kRadius * kTurnRate * std::sin(kTurnRate * x[2]),
        kRadius * kTurnRate * std::cos(kTurnRate * x[2]), 1.0;
    return b;
  };
  p.reaction = [](const Vec&) { return 0.0; };
  p.source = [](const Vec&) { return 0.0; };
  auto u = [M](const Vec& x) {
    const auto [c1, c2] = spiral_center(x[2]);
    const double r1 = x[0] - c1, r2 = x[1] - c2;
    return 1.0 + std::tanh(M * (kRadius * kRadius - r1 * r1 - r2 * r2));
  };
  auto grad = [M](const Vec& x) {
    const auto [c1, c2] = spiral_center(x[2]);
    const double r1 = x[0] - c1, r2 = x[1] - c2;
    const double dc1 = -kRadius * kTurnRate * std::sin(kTurnRate * x[2]);
    const double dc2 = kRadius * kTurnRate * std::cos(kTurnRate * x[2]);
    double th = 0.0;
    const double s2 = sech2_tanh(M * (kRadius * kRadius - r1 * r1 - r2 * r2), th);
    Vec g(3);
    g << -2.0 * r1, -2.0 * r2, 2.0 * r1 * dc1 + 2.0 * r2 * dc2;
    return Vec(M * s2 * g);
  };
  p.inflow = u;
  p.exact = ExactSolution{u, grad};
  return p;
}

}  // namespace

std::pair<double, double> spiral_center(double x3) {
  return {kRadius * std::cos(kTurnRate * x3) + 0.45, kRadius * std::sin(kTurnRate * x3) + 0.5};
}

double tanh2d_limit(const Vec& x) {
  const double s = x[1] - x[0] / 3.0 - 0.5;
  return 1.0 + (s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0));
}

BenchmarkLabel parse_benchmark_label(const std::string& s) {
  if (s == "tanh2d") return BenchmarkLabel::tanh2d;
  if (s == "spiral3d") return BenchmarkLabel::spiral3d;
  throw ConfigError("unknown benchmark label '" + s + "'");
}

std::string to_string(BenchmarkLabel label) {
  return label == BenchmarkLabel::tanh2d ? "tanh2d" : "spiral3d";
}

BenchmarkInstance make_benchmark(BenchmarkLabel label, double M) {
  if (!(M > 0.0)) throw ConfigError("layer parameter M must be positive");
  BenchmarkInstance b;
  b.M = M;
  b.label = label;
  b.problem = label == BenchmarkLabel::tanh2d ? tanh2d(M) : spiral3d(M);
  return b;
}

BenchmarkInstance make_benchmark(const std::string& label, double M) {
  return make_benchmark(parse_benchmark_label(label), M);
}

BoundaryKind classify_boundary(const AdvectionReactionProblem& problem, const Face& face,
                               const Vec& x) {
  const double bn = problem.velocity(x).dot(face.normal);
  if (bn < -kCharacteristicTol) return BoundaryKind::inflow;
  if (bn > kCharacteristicTol) return BoundaryKind::outflow;
  return BoundaryKind::characteristic;
}

}  // namespace rmdg
