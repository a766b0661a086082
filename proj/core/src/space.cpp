#include "rmdg/space.hpp"

#include <algorithm>
#include <numeric>
#include <cstdint>
#include <unordered_map>

namespace rmdg {

int local_dimension(int dim, int degree) {
  if (degree == 1) return dim + 1;
  if (degree == 2) return (dim + 1) * (dim + 2) / 2;
  throw SpaceError("unsupported polynomial degree " + std::to_string(degree));
}

LagrangeBasis::LagrangeBasis(int dim, int degree)
    : dim_(dim), degree_(degree), size_(local_dimension(dim, degree)) {
  for (int i = 0; i <= dim; ++i) {
    std::array<double, 4> p{0, 0, 0, 0};
    p[i] = 1.0;
    nodes_.push_back(p);
  }
  if (degree == 2) {
    for (int i = 0; i <= dim; ++i)
      for (int j = i + 1; j <= dim; ++j) {
        edges_.push_back({i, j});
        std::array<double, 4> p{0, 0, 0, 0};
        p[i] = p[j] = 0.5;
        nodes_.push_back(p);
      }
  }
}

void LagrangeBasis::values(std::span<const double> l, std::span<double> out) const {
  if (degree_ == 1) {
    for (int i = 0; i <= dim_; ++i) out[i] = l[i];
    return;
  }
  for (int i = 0; i <= dim_; ++i) out[i] = l[i] * (2.0 * l[i] - 1.0);
  int n = dim_ + 1;
  for (const auto& [a, b] : edges_) out[n++] = 4.0 * l[a] * l[b];
}

void LagrangeBasis::lambda_derivatives(std::span<const double> l, std::span<double> out) const {
  const int m = dim_ + 1;
  std::fill(out.begin(), out.begin() + size_ * m, 0.0);
  if (degree_ == 1) {
    for (int i = 0; i <= dim_; ++i) out[i * m + i] = 1.0;
    return;
  }
  for (int i = 0; i <= dim_; ++i) out[i * m + i] = 4.0 * l[i] - 1.0;
  int n = dim_ + 1;
  for (const auto& [a, b] : edges_) {
    out[n * m + a] = 4.0 * l[b];
    out[n * m + b] = 4.0 * l[a];
    ++n;
  }
}

FunctionSpace::FunctionSpace(std::shared_ptr<const SimplicialMesh> mesh, SpaceKind kind,
                             int degree)
    : mesh_(std::move(mesh)),
      kind_(kind),
      degree_(degree),
      basis_(mesh_->dim(), degree) {
  const int nl = basis_.size();
  const int nc = mesh_->n_cells();
  dof_map_.resize(static_cast<std::size_t>(nc) * nl);

  if (kind_ == SpaceKind::broken) {
    std::iota(dof_map_.begin(), dof_map_.end(), 0);
    n_dofs_ = nc * nl;
    return;
  }

  // Vertex DOFs keep the vertex numbering, edge DOFs follow in order of
  // first appearance. Vertices are unique, so shared nodes are identified
  // topologically.
  const int nv = mesh_->n_vertices();
  std::unordered_map<std::uint64_t, int> edge_dof;
  int next = nv;
  for (int c = 0; c < nc; ++c) {
    const auto v = mesh_->cell_vertices(c);
    int* dofs = dof_map_.data() + static_cast<std::size_t>(c) * nl;
    for (int i = 0; i <= mesh_->dim(); ++i) dofs[i] = v[i];
    int n = mesh_->dim() + 1;
    for (const auto& [a, b] : basis_.edges()) {
      const auto lo = static_cast<std::uint64_t>(std::min(v[a], v[b]));
      const auto hi = static_cast<std::uint64_t>(std::max(v[a], v[b]));
      auto [it, inserted] = edge_dof.try_emplace((lo << 32) | hi, next);
      if (inserted) ++next;
      dofs[n++] = it->second;
    }
  }
  n_dofs_ = next;
}

FunctionSpace build_space(std::shared_ptr<const SimplicialMesh> mesh, SpaceKind kind,
                          int degree) {
  if (degree != 1 && degree != 2)
    throw SpaceError("unsupported polynomial degree " + std::to_string(degree));
  return FunctionSpace(std::move(mesh), kind, degree);
}

void check_same_mesh(const FunctionSpace& a, const FunctionSpace& b) {
  if (&a.mesh() != &b.mesh()) throw SpaceError("function spaces live on different meshes");
}

BasisEvaluation eval_basis(const FunctionSpace& space, int cell,
                           std::span<const std::array<double, 4>> points) {
  const auto& basis = space.basis();
  const int d = space.mesh().dim();
  const int nl = basis.size();
  const auto& g = space.mesh().geometry(cell);
  BasisEvaluation out;
  out.values.resize(static_cast<Eigen::Index>(points.size()), nl);
  out.gradients.assign(d, Eigen::MatrixXd(static_cast<Eigen::Index>(points.size()), nl));
  std::vector<double> vals(nl), dl(nl * (d + 1));
  for (std::size_t q = 0; q < points.size(); ++q) {
    basis.values(points[q], vals);
    basis.lambda_derivatives(points[q], dl);
    for (int i = 0; i < nl; ++i) {
      out.values(static_cast<Eigen::Index>(q), i) = vals[i];
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m <= d; ++m) s += dl[i * (d + 1) + m] * g.barycentric_gradients(m, k);
        out.gradients[k](static_cast<Eigen::Index>(q), i) = s;
      }
    }
  }
  return out;
}

CellValues::CellValues(const FunctionSpace& space, int quad_degree)
    : space_(&space),
      rule_(&quadrature_for(quad_degree, space.mesh().dim())),
      dim_(space.mesh().dim()),
      n_local_(space.n_local()) {
  const int nq = n_points();
  ref_values_.resize(nq, n_local_);
  ref_lambda_derivs_.assign(nq, Eigen::MatrixXd(n_local_, dim_ + 1));
  std::vector<double> vals(n_local_), dl(n_local_ * (dim_ + 1));
  for (int q = 0; q < nq; ++q) {
    space.basis().values(rule_->points[q], vals);
    space.basis().lambda_derivatives(rule_->points[q], dl);
    for (int i = 0; i < n_local_; ++i) {
      ref_values_(q, i) = vals[i];
      for (int m = 0; m <= dim_; ++m) ref_lambda_derivs_[q](i, m) = dl[i * (dim_ + 1) + m];
    }
  }
  points_.assign(nq, Vec::Zero(dim_));
  jxw_.assign(nq, 0.0);
  gradients_.assign(nq, Eigen::MatrixXd(n_local_, dim_));
}

void CellValues::reinit(int cell) {
  const auto& mesh = space_->mesh();
  const auto& g = mesh.geometry(cell);
  const auto verts = mesh.cell_vertices(cell);
  const double scale = g.volume / reference_measure(dim_);
  const Eigen::MatrixXd grad_lambda = g.barycentric_gradients.topLeftCorner(dim_ + 1, dim_);
  for (int q = 0; q < n_points(); ++q) {
    Vec x = Vec::Zero(dim_);
    for (int v = 0; v <= dim_; ++v) x += rule_->points[q][v] * mesh.vertex(verts[v]);
    points_[q] = x;
    jxw_[q] = rule_->weights[q] * scale;
    gradients_[q].noalias() = ref_lambda_derivs_[q] * grad_lambda;
  }
}

FaceValues::FaceValues(const FunctionSpace& space, int quad_degree)
    : space_(&space),
      rule_(&quadrature_for(quad_degree, space.mesh().dim() - 1)),
      dim_(space.mesh().dim()),
      n_local_(space.n_local()) {
  const int nq = n_points();
  points_.assign(nq, Vec::Zero(dim_));
  jxw_.assign(nq, 0.0);
  values_.resize(nq, n_local_);
  gradients_.assign(nq, Eigen::MatrixXd(n_local_, dim_));
}

void FaceValues::reinit(const Face& face, int cell) {
  const auto& mesh = space_->mesh();
  const auto& g = mesh.geometry(cell);
  const auto cv = mesh.cell_vertices(cell);
  const auto fv = mesh.face_vertices(face);

  std::array<int, 3> local{};
  for (int i = 0; i < dim_; ++i) {
    const auto it = std::find(cv.begin(), cv.end(), fv[i]);
    if (it == cv.end()) throw MeshError("face does not belong to cell");
    local[i] = static_cast<int>(it - cv.begin());
  }

  const double scale = face.measure / reference_measure(dim_ - 1);
  const Eigen::MatrixXd grad_lambda = g.barycentric_gradients.topLeftCorner(dim_ + 1, dim_);
  std::vector<double> vals(n_local_), dl(n_local_ * (dim_ + 1));
  Eigen::MatrixXd dlm(n_local_, dim_ + 1);
  for (int q = 0; q < n_points(); ++q) {
    std::array<double, 4> lambda{0, 0, 0, 0};
    Vec x = Vec::Zero(dim_);
    for (int i = 0; i < dim_; ++i) {
      lambda[local[i]] = rule_->points[q][i];
      x += rule_->points[q][i] * mesh.vertex(fv[i]);
    }
    points_[q] = x;
    jxw_[q] = rule_->weights[q] * scale;
    space_->basis().values(lambda, vals);
    space_->basis().lambda_derivatives(lambda, dl);
    for (int i = 0; i < n_local_; ++i) {
      values_(q, i) = vals[i];
      for (int m = 0; m <= dim_; ++m) dlm(i, m) = dl[i * (dim_ + 1) + m];
    }
    gradients_[q].noalias() = dlm * grad_lambda;
  }
}

std::array<double, 4> barycentric(const SimplicialMesh& mesh, int cell, const Vec& x) {
  const auto& g = mesh.geometry(cell);
  const int d = mesh.dim();
  const Vec ref = g.inverse_jacobian * (x - g.origin);
  std::array<double, 4> l{0, 0, 0, 0};
  l[0] = 1.0;
  for (int k = 0; k < d; ++k) {
    l[k + 1] = ref[k];
    l[0] -= ref[k];
  }
  return l;
}

double evaluate(const FunctionSpace& space, const Eigen::VectorXd& coeffs, int cell,
                const Vec& x) {
  const auto l = barycentric(space.mesh(), cell, x);
  std::array<double, 10> vals{};
  space.basis().values(l, vals);
  const auto dofs = space.cell_dofs(cell);
  double s = 0.0;
  for (int i = 0; i < space.n_local(); ++i) s += vals[i] * coeffs[dofs[i]];
  return s;
}

Eigen::SparseMatrix<double> embedding_matrix(const FunctionSpace& conforming,
                                             const FunctionSpace& broken) {
  check_same_mesh(conforming, broken);
  if (conforming.degree() != broken.degree() || conforming.kind() != SpaceKind::conforming ||
      broken.kind() != SpaceKind::broken)
    throw SpaceError("embedding needs a conforming and a broken space of the same degree");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(broken.n_dofs());
  for (int c = 0; c < broken.mesh().n_cells(); ++c) {
    const auto bd = broken.cell_dofs(c);
    const auto cd = conforming.cell_dofs(c);
    for (int i = 0; i < broken.n_local(); ++i) t.emplace_back(bd[i], cd[i], 1.0);
  }
  Eigen::SparseMatrix<double> e(broken.n_dofs(), conforming.n_dofs());
  e.setFromTriplets(t.begin(), t.end());
  return e;
}

Eigen::VectorXd embed_conforming(const FunctionSpace& conforming, const FunctionSpace& broken,
                                 const Eigen::VectorXd& coeffs) {
  check_same_mesh(conforming, broken);
  if (conforming.degree() != broken.degree() || conforming.kind() != SpaceKind::conforming ||
      broken.kind() != SpaceKind::broken)
    throw SpaceError("embedding needs a conforming and a broken space of the same degree");
  if (coeffs.size() != conforming.n_dofs()) throw SpaceError("coefficient vector size mismatch");
  Eigen::VectorXd out(broken.n_dofs());
  for (int c = 0; c < broken.mesh().n_cells(); ++c) {
    const auto bd = broken.cell_dofs(c);
    const auto cd = conforming.cell_dofs(c);
    for (int i = 0; i < broken.n_local(); ++i) out[bd[i]] = coeffs[cd[i]];
  }
  return out;
}

}  // namespace rmdg
