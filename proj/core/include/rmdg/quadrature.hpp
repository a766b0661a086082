#pragma once

#include <array>
#include <vector>

namespace rmdg {

/// Quadrature on the reference simplex of dimension 1, 2 or 3. Points are
/// barycentric (dim + 1 entries used); weights sum to the reference measure
/// 1, 1/2 or 1/6.
struct QuadratureRule {
  int dim = 0;
  int degree = 0;
  std::vector<std::array<double, 4>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

double reference_measure(int dim);

/// Rule exact for polynomials of total degree <= degree_needed (at most 10).
/// Degree 0 and 1 give the centroid rule; higher degrees use collapsed
/// Gauss-Legendre products, which keep every weight positive.
const QuadratureRule& quadrature_for(int degree_needed, int dim);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace rmdg
