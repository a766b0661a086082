#pragma once

#include "rmdg/mesh.hpp"
#include "rmdg/quadrature.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <span>
#include <vector>

namespace rmdg {

/// Nodal Lagrange basis of degree 1 or 2 on a simplex, in barycentric
/// coordinates. Local ordering: vertices first, then edge midpoints (i, j)
/// with i < j in lexicographic order.
class LagrangeBasis {
 public:
  LagrangeBasis(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return size_; }

  void values(std::span<const double> lambda, std::span<double> out) const;
  /// out(i, k) = d phi_i / d lambda_k, row-major size() x (dim + 1).
  void lambda_derivatives(std::span<const double> lambda, std::span<double> out) const;

  const std::vector<std::array<double, 4>>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }

 private:
  int dim_;
  int degree_;
  int size_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<double, 4>> nodes_;
};

int local_dimension(int dim, int degree);

enum class SpaceKind { broken, conforming };

/// Piecewise P^p functions on a mesh: broken (V_h) or continuous (U_h).
class FunctionSpace {
 public:
  FunctionSpace(std::shared_ptr<const SimplicialMesh> mesh, SpaceKind kind, int degree);

  const SimplicialMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SimplicialMesh>& mesh_ptr() const { return mesh_; }
  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  int n_dofs() const { return n_dofs_; }
  int n_local() const { return basis_.size(); }
  const LagrangeBasis& basis() const { return basis_; }

  std::span<const int> cell_dofs(int cell) const {
    return {dof_map_.data() + static_cast<std::size_t>(cell) * n_local(),
            static_cast<std::size_t>(n_local())};
  }

 private:
  std::shared_ptr<const SimplicialMesh> mesh_;
  SpaceKind kind_;
  int degree_;
  LagrangeBasis basis_;
  std::vector<int> dof_map_;
  int n_dofs_ = 0;
};

FunctionSpace build_space(std::shared_ptr<const SimplicialMesh> mesh, SpaceKind kind, int degree);

/// Basis values and physical gradients at barycentric points of one cell.
struct BasisEvaluation {
  Eigen::MatrixXd values;                  // n_points x n_local
  std::vector<Eigen::MatrixXd> gradients;  // dim entries, each n_points x n_local
};

BasisEvaluation eval_basis(const FunctionSpace& space, int cell,
                           std::span<const std::array<double, 4>> points);

/// Quadrature data on one cell: physical points, weights with |det J| folded
/// in, basis values and gradients. Reference data is computed once.
class CellValues {
 public:
  CellValues(const FunctionSpace& space, int quad_degree);

  void reinit(int cell);

  int n_points() const { return static_cast<int>(rule_->size()); }
  int n_local() const { return n_local_; }
  const Vec& point(int q) const { return points_[q]; }
  double JxW(int q) const { return jxw_[q]; }
  double value(int q, int i) const { return ref_values_(q, i); }
  /// Physical gradient of basis function i at point q.
  auto gradient(int q, int i) const { return gradients_[q].row(i); }

 private:
  const FunctionSpace* space_;
  const QuadratureRule* rule_;
  int dim_;
  int n_local_;
  Eigen::MatrixXd ref_values_;
  std::vector<Eigen::MatrixXd> ref_lambda_derivs_;  // per point, n_local x (dim+1)
  std::vector<Vec> points_;
  std::vector<double> jxw_;
  std::vector<Eigen::MatrixXd> gradients_;  // per point, n_local x dim
};

/// Quadrature data on one face, seen from one adjacent cell.
class FaceValues {
 public:
  FaceValues(const FunctionSpace& space, int quad_degree);

  /// Evaluate the basis of `cell` on `face`; the face must belong to the cell.
  void reinit(const Face& face, int cell);

  int n_points() const { return static_cast<int>(rule_->size()); }
  int n_local() const { return n_local_; }
  const Vec& point(int q) const { return points_[q]; }
  double JxW(int q) const { return jxw_[q]; }
  double value(int q, int i) const { return values_(q, i); }
  auto gradient(int q, int i) const { return gradients_[q].row(i); }

 private:
  const FunctionSpace* space_;
  const QuadratureRule* rule_;
  int dim_;
  int n_local_;
  std::vector<Vec> points_;
  std::vector<double> jxw_;
  Eigen::MatrixXd values_;
  std::vector<Eigen::MatrixXd> gradients_;
};

/// Barycentric coordinates of x with respect to a cell.
std::array<double, 4> barycentric(const SimplicialMesh& mesh, int cell, const Vec& x);

/// Value of a space function restricted to `cell` at physical point x.
double evaluate(const FunctionSpace& space, const Eigen::VectorXd& coeffs, int cell, const Vec& x);

/// Selection matrix E with broken = E * conforming (0/1 entries).
Eigen::SparseMatrix<double> embedding_matrix(const FunctionSpace& conforming,
                                             const FunctionSpace& broken);

Eigen::VectorXd embed_conforming(const FunctionSpace& conforming, const FunctionSpace& broken,
                                 const Eigen::VectorXd& coeffs);

/// Nodal interpolant of a function of position.
template <class F>
Eigen::VectorXd interpolate(const FunctionSpace& space, F&& f) {
  Eigen::VectorXd c(space.n_dofs());
  const auto& mesh = space.mesh();
  const auto& nodes = space.basis().nodes();
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto dofs = space.cell_dofs(k);
    const auto verts = mesh.cell_vertices(k);
    for (int i = 0; i < space.n_local(); ++i) {
      Vec x = Vec::Zero(mesh.dim());
      for (int v = 0; v <= mesh.dim(); ++v) x += nodes[i][v] * mesh.vertex(verts[v]);
      c[dofs[i]] = f(x);
    }
  }
  return c;
}

void check_same_mesh(const FunctionSpace& a, const FunctionSpace& b);

}  // namespace rmdg
