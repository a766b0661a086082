#include "rmdg/quadrature.hpp"

#include "rmdg/common.hpp"

#include <cmath>
#include <numbers>

namespace rmdg {

namespace {

constexpr int kMaxDegree = 10;

QuadratureRule centroid_rule(int dim, int degree) {
  QuadratureRule r;
  r.dim = dim;
  r.degree = degree;
  std::array<double, 4> p{0, 0, 0, 0};
  for (int i = 0; i <= dim; ++i) p[i] = 1.0 / (dim + 1);
  r.points.push_back(p);
  r.weights.push_back(reference_measure(dim));
  return r;
}

QuadratureRule collapsed_rule(int dim, int degree) {
  QuadratureRule r;
  r.dim = dim;
  r.degree = degree;
  auto points_for = [](int exact_degree) { return (exact_degree + 2) / 2; };

  std::vector<double> x1, w1, x2, w2, x3, w3;
  gauss_legendre(points_for(degree), x1, w1);
  if (dim == 1) {
    for (std::size_t i = 0; i < x1.size(); ++i) {
      r.points.push_back({1.0 - x1[i], x1[i], 0.0, 0.0});
      r.weights.push_back(w1[i]);
    }
    return r;
  }
  gauss_legendre(points_for(degree + 1), x2, w2);
  if (dim == 2) {
    // (s, t) in [0,1]^2 -> (s (1 - t), t), Jacobian (1 - t)
    for (std::size_t j = 0; j < x2.size(); ++j)
      for (std::size_t i = 0; i < x1.size(); ++i) {
        const double t = x2[j];
        const double x = x1[i] * (1.0 - t);
        r.points.push_back({1.0 - x - t, x, t, 0.0});
        r.weights.push_back(w1[i] * w2[j] * (1.0 - t));
      }
    return r;
  }
  gauss_legendre(points_for(degree + 2), x3, w3);
  for (std::size_t k = 0; k < x3.size(); ++k)
    for (std::size_t j = 0; j < x2.size(); ++j)
      for (std::size_t i = 0; i < x1.size(); ++i) {
        const double u = x3[k];
        const double t = x2[j] * (1.0 - u);
        const double s = x1[i] * (1.0 - x2[j]) * (1.0 - u);
        r.points.push_back({1.0 - s - t - u, s, t, u});
        r.weights.push_back(w1[i] * w2[j] * w3[k] * (1.0 - x2[j]) * (1.0 - u) * (1.0 - u));
      }
  return r;
}

struct RuleTable {
  std::array<std::array<QuadratureRule, kMaxDegree + 1>, 3> rules;
  RuleTable() {
    for (int dim = 1; dim <= 3; ++dim)
      for (int q = 0; q <= kMaxDegree; ++q)
        rules[dim - 1][q] = q <= 1 ? centroid_rule(dim, q) : collapsed_rule(dim, q);
  }
};

}  // namespace

double reference_measure(int dim) {
  switch (dim) {
    case 0: return 1.0;
    case 1: return 1.0;
    case 2: return 0.5;
    case 3: return 1.0 / 6.0;
    default: throw SpaceError("unsupported simplex dimension");
  }
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess, on [-1, 1]
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

const QuadratureRule& quadrature_for(int degree_needed, int dim) {
  if (degree_needed < 0 || degree_needed > kMaxDegree)
    throw SpaceError("unsupported quadrature degree " + std::to_string(degree_needed));
  if (dim < 1 || dim > 3) throw SpaceError("unsupported quadrature dimension");
  static const RuleTable table;
  return table.rules[dim - 1][degree_needed];
}

}  // namespace rmdg
