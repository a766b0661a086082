#pragma once

#include "rmdg/adapt.hpp"

#include <memory>
#include <random>

namespace rmdg::testing {

inline std::shared_ptr<const SimplicialMesh> square(int n) {
  return std::make_shared<const SimplicialMesh>(build_structured_mesh(2, n));
}

inline std::shared_ptr<const SimplicialMesh> cube(int n) {
  return std::make_shared<const SimplicialMesh>(build_structured_mesh(3, n));
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Vec point(double x, double y) {
  Vec p(2);
  p << x, y;
  return p;
}

inline Vec point(double x, double y, double z) {
  Vec p(3);
  p << x, y, z;
  return p;
}

/// Constant-coefficient problem with no exact solution attached.
inline AdvectionReactionProblem constant_problem(Vec b, double gamma, double f, double g) {
  AdvectionReactionProblem p;
  p.dim = static_cast<int>(b.size());
  p.velocity = [b](const Vec&) { return b; };
  p.reaction = [gamma](const Vec&) { return gamma; };
  p.source = [f](const Vec&) { return f; };
  p.inflow = [g](const Vec&) { return g; };
  return p;
}

/// Problem with b = (3, 1), gamma and exact solution u; f and g follow from u.
template <class U, class GradU>
AdvectionReactionProblem manufactured(double gamma, U u, GradU grad) {
  AdvectionReactionProblem p;
  p.dim = 2;
  const Vec b = point(3.0, 1.0);
  p.velocity = [b](const Vec&) { return b; };
  p.reaction = [gamma](const Vec&) { return gamma; };
  p.source = [=](const Vec& x) { return b.dot(grad(x)) + gamma * u(x); };
  p.inflow = u;
  p.exact = ExactSolution{u, grad};
  return p;
}

}  // namespace rmdg::testing
