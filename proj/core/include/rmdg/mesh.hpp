#pragma once

#include "rmdg/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace rmdg {

/// One (d-1)-simplex of the skeleton. The normal points from the plus cell to
/// the minus cell on interior faces and outward on boundary faces.
struct Face {
  std::array<int, 3> vertices{-1, -1, -1};  // first `dim` entries used
  int plus_cell = -1;
  int plus_local = -1;  // local face index in plus cell (= opposite vertex)
  std::optional<int> minus_cell;
  int minus_local = -1;
  Vec normal;
  double measure = 0.0;
};

struct CellGeometry {
  Vec origin;           // first vertex
  Mat jacobian;         // columns x_i - x_0
  Mat inverse_jacobian;
  double volume = 0.0;
  double diameter = 0.0;  // longest edge, h_K
  /// Gradients of the barycentric coordinates, one row per vertex.
  Eigen::Matrix<double, 4, 3> barycentric_gradients =
      Eigen::Matrix<double, 4, 3>::Zero();
  /// Outward unit normals; row f is the normal of the face opposite vertex f.
  Eigen::Matrix<double, 4, 3> face_normals = Eigen::Matrix<double, 4, 3>::Zero();
};

/// Conforming simplicial mesh of the unit square or cube.
///
/// Cells carry an ordered vertex tuple and a bisection tag. The ordering and
/// tag define the refinement edge (vertex 0 to vertex `tag`) for
/// newest-vertex bisection. Geometry is computed with |det J| so the vertex
/// order never needs to be permuted to fix orientation.
class SimplicialMesh {
 public:
  struct Cell {
    std::array<int, 4> vertices{-1, -1, -1, -1};
    int tag = 0;
  };

  SimplicialMesh(int dim, std::vector<Vec> vertices, std::vector<Cell> cells,
                 int generation = 0, std::vector<int> parents = {});

  int dim() const { return dim_; }
  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_cells() const { return static_cast<int>(cells_.size()); }
  int generation() const { return generation_; }

  const Vec& vertex(int i) const { return vertices_[i]; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const Cell& cell(int c) const { return cells_[c]; }
  std::span<const int> cell_vertices(int c) const {
    return {cells_[c].vertices.data(), static_cast<std::size_t>(dim_ + 1)};
  }
  std::span<const int> face_vertices(const Face& f) const {
    return {f.vertices.data(), static_cast<std::size_t>(dim_)};
  }

  const CellGeometry& geometry(int c) const { return geometry_[c]; }
  Vec centroid(int c) const;
  double total_volume() const;

  const std::vector<Face>& interior_faces() const { return interior_faces_; }
  const std::vector<Face>& boundary_faces() const { return boundary_faces_; }

  /// For refined meshes, the index of the ancestor cell in the mesh that was
  /// refined. Empty for a freshly built mesh.
  const std::vector<int>& parents() const { return parents_; }

  /// Every boundary face lies on the boundary of the unit box; a hanging node
  /// would leave an unmatched face in the interior.
  bool conformity_audit() const;

  /// Minimum over cells of inradius / diameter.
  double min_shape_ratio() const;

  void write(std::ostream& os) const;

 private:
  int dim_;
  std::vector<Vec> vertices_;
  std::vector<Cell> cells_;
  std::vector<CellGeometry> geometry_;
  std::vector<Face> interior_faces_;
  std::vector<Face> boundary_faces_;
  int generation_ = 0;
  std::vector<int> parents_;
};

/// Uniform simplicial mesh of (0,1)^dim with n cells per axis. Squares are
/// split by the lower-left to upper-right diagonal, cubes into the six Kuhn
/// tetrahedra. Refinement edges start on the longest edge of every cell.
SimplicialMesh build_structured_mesh(int dim, int n);

/// Interior and boundary faces of a cell list. Throws MeshError when a face
/// is shared by more than two cells.
std::pair<std::vector<Face>, std::vector<Face>> extract_skeleton(
    int dim, const std::vector<Vec>& vertices,
    const std::vector<SimplicialMesh::Cell>& cells,
    const std::vector<CellGeometry>& geometry);

/// Newest-vertex bisection of the marked cells followed by conformity
/// closure. The result records each child's ancestor in `mesh`.
SimplicialMesh bisect_refine(const SimplicialMesh& mesh, std::span<const int> marked);

CellGeometry cell_geometry(int dim, std::span<const Vec> vertices);
const CellGeometry& cell_geometry(const SimplicialMesh& mesh, int cell);

}  // namespace rmdg
