#include "rmdg/mesh.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace rmdg {

namespace {

struct FaceKey {
  std::array<int, 3> v;
  bool operator==(const FaceKey&) const = default;
};

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int x : k.v) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double face_measure(int dim, std::span<const Vec> pts) {
  if (dim == 2) return (pts[1] - pts[0]).norm();
  const Eigen::Vector3d a = pts[1] - pts[0];
  const Eigen::Vector3d b = pts[2] - pts[0];
  return 0.5 * a.cross(b).norm();
}

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0};

}  // namespace

CellGeometry cell_geometry(int dim, std::span<const Vec> vertices) {
  CellGeometry g;
  g.origin = vertices[0];
  g.jacobian.resize(dim, dim);
  for (int i = 0; i < dim; ++i) g.jacobian.col(i) = vertices[i + 1] - vertices[0];
  const double det = g.jacobian.determinant();

  double h = 0.0;
  for (int i = 0; i <= dim; ++i)
    for (int j = i + 1; j <= dim; ++j) h = std::max(h, (vertices[i] - vertices[j]).norm());
  g.diameter = h;

  if (!(std::abs(det) > 1e-14 * std::pow(h, dim)))
    throw MeshError("degenerate cell: zero volume");
  g.volume = std::abs(det) / kFactorial[dim];
  g.inverse_jacobian = g.jacobian.inverse();

  for (int k = 0; k < dim; ++k) {
    g.barycentric_gradients.block(k + 1, 0, 1, dim) = g.inverse_jacobian.row(k);
    g.barycentric_gradients.block(0, 0, 1, dim) -= g.inverse_jacobian.row(k);
  }
  for (int f = 0; f <= dim; ++f) {
    const Eigen::RowVector3d grad = g.barycentric_gradients.row(f);
    g.face_normals.row(f) = -grad / grad.norm();
  }
  return g;
}

const CellGeometry& cell_geometry(const SimplicialMesh& mesh, int cell) {
  if (cell < 0 || cell >= mesh.n_cells()) throw MeshError("cell index out of range");
  return mesh.geometry(cell);
}

std::pair<std::vector<Face>, std::vector<Face>> extract_skeleton(
    int dim, const std::vector<Vec>& vertices,
    const std::vector<SimplicialMesh::Cell>& cells,
    const std::vector<CellGeometry>& geometry) {
  std::unordered_map<FaceKey, int, FaceKeyHash> index;
  index.reserve(cells.size() * (dim + 1));
  std::vector<Face> faces;
  faces.reserve(cells.size() * (dim + 1));

  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    for (int f = 0; f <= dim; ++f) {
      Face face;
      int n = 0;
      for (int i = 0; i <= dim; ++i)
        if (i != f) face.vertices[n++] = cells[c].vertices[i];
      FaceKey key{{-1, -1, -1}};
      std::copy_n(face.vertices.begin(), dim, key.v.begin());
      std::sort(key.v.begin(), key.v.begin() + dim);

      auto [it, inserted] = index.try_emplace(key, static_cast<int>(faces.size()));
      if (inserted) {
        face.plus_cell = c;
        face.plus_local = f;
        face.normal = geometry[c].face_normals.row(f).head(dim).transpose();
        std::array<Vec, 3> pts;
        for (int i = 0; i < dim; ++i) pts[i] = vertices[face.vertices[i]];
        face.measure = face_measure(dim, {pts.data(), static_cast<std::size_t>(dim)});
        faces.push_back(std::move(face));
      } else {
        Face& existing = faces[it->second];
        if (existing.minus_cell)
          throw MeshError("non-conforming mesh: face shared by more than two cells");
        existing.minus_cell = c;
        existing.minus_local = f;
      }
    }
  }

  std::vector<Face> interior;
  std::vector<Face> boundary;
  for (auto& f : faces) (f.minus_cell ? interior : boundary).push_back(std::move(f));
  return {std::move(interior), std::move(boundary)};
}

SimplicialMesh::SimplicialMesh(int dim, std::vector<Vec> vertices, std::vector<Cell> cells,
                               int generation, std::vector<int> parents)
    : dim_(dim),
      vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      generation_(generation),
      parents_(std::move(parents)) {
  if (dim_ != 2 && dim_ != 3) throw MeshError("only 2D and 3D meshes are supported");
  geometry_.reserve(cells_.size());
  std::array<Vec, 4> pts;
  for (const auto& c : cells_) {
    for (int i = 0; i <= dim_; ++i) {
      if (c.vertices[i] < 0 || c.vertices[i] >= n_vertices())
        throw MeshError("cell references a missing vertex");
      pts[i] = vertices_[c.vertices[i]];
    }
    geometry_.push_back(cell_geometry(dim_, {pts.data(), static_cast<std::size_t>(dim_ + 1)}));
  }
  std::tie(interior_faces_, boundary_faces_) =
      extract_skeleton(dim_, vertices_, cells_, geometry_);
}

Vec SimplicialMesh::centroid(int c) const {
  Vec x = Vec::Zero(dim_);
  for (int v : cell_vertices(c)) x += vertices_[v];
  return x / (dim_ + 1);
}

double SimplicialMesh::total_volume() const {
  double v = 0.0;
  for (const auto& g : geometry_) v += g.volume;
  return v;
}

bool SimplicialMesh::conformity_audit() const {
  constexpr double tol = 1e-12;
  for (const auto& f : boundary_faces_) {
    bool on_boundary = false;
    for (int axis = 0; axis < dim_ && !on_boundary; ++axis) {
      for (double side : {0.0, 1.0}) {
        bool all = true;
        for (int v : face_vertices(f)) all = all && std::abs(vertices_[v][axis] - side) < tol;
        if (all) {
          on_boundary = true;
          break;
        }
      }
    }
    if (!on_boundary) return false;
  }
  return true;
}

double SimplicialMesh::min_shape_ratio() const {
  double ratio = std::numeric_limits<double>::infinity();
  std::array<Vec, 3> pts;
  for (int c = 0; c < n_cells(); ++c) {
    double area = 0.0;
    for (int f = 0; f <= dim_; ++f) {
      int n = 0;
      for (int i = 0; i <= dim_; ++i)
        if (i != f) pts[n++] = vertices_[cells_[c].vertices[i]];
      area += face_measure(dim_, {pts.data(), static_cast<std::size_t>(dim_)});
    }
    const double inradius = dim_ * geometry_[c].volume / area;
    ratio = std::min(ratio, inradius / geometry_[c].diameter);
  }
  return ratio;
}

void SimplicialMesh::write(std::ostream& os) const {
  os << dim_ << ' ' << n_vertices() << ' ' << n_cells() << '\n';
  os << std::setprecision(17);
  for (const auto& x : vertices_) {
    for (int k = 0; k < dim_; ++k) os << (k ? " " : "") << x[k];
    os << '\n';
  }
  for (int c = 0; c < n_cells(); ++c) {
    const auto v = cell_vertices(c);
    for (int i = 0; i <= dim_; ++i) os << (i ? " " : "") << v[i];
    os << '\n';
  }
}

SimplicialMesh build_structured_mesh(int dim, int n) {
  if (n < 1) throw MeshError("structured mesh needs at least one cell per axis");
  if (dim != 2 && dim != 3) throw MeshError("only 2D and 3D meshes are supported");

  const int np = n + 1;
  std::vector<Vec> vertices;
  std::vector<SimplicialMesh::Cell> cells;
  const double h = 1.0 / n;

  if (dim == 2) {
    vertices.reserve(np * np);
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) {
        Vec x(2);
        x << i * h, j * h;
        vertices.push_back(x);
      }
    auto id = [np](int i, int j) { return i + np * j; };
    cells.reserve(2 * n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int ll = id(i, j), lr = id(i + 1, j), ur = id(i + 1, j + 1), ul = id(i, j + 1);
        // refinement edge ll-ur is the diagonal, the longest edge
        cells.push_back({{ll, lr, ur, -1}, 2});
        cells.push_back({{ll, ul, ur, -1}, 2});
      }
  } else {
    vertices.reserve(np * np * np);
    for (int k = 0; k < np; ++k)
      for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i) {
          Vec x(3);
          x << i * h, j * h, k * h;
          vertices.push_back(x);
        }
    auto id = [np](int i, int j, int k) { return i + np * (j + np * k); };
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));

    cells.reserve(6 * n * n * n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          for (const auto& p : perms) {
            // Kuhn path from the lower corner to the upper corner; the
            // refinement edge is the cube diagonal.
            std::array<int, 3> c{i, j, k};
            SimplicialMesh::Cell cell;
            cell.tag = 3;
            cell.vertices[0] = id(c[0], c[1], c[2]);
            for (int s = 0; s < 3; ++s) {
              ++c[p[s]];
              cell.vertices[s + 1] = id(c[0], c[1], c[2]);
            }
            cells.push_back(cell);
          }
  }
  return SimplicialMesh(dim, std::move(vertices), std::move(cells));
}

SimplicialMesh bisect_refine(const SimplicialMesh& mesh, std::span<const int> marked) {
  const int dim = mesh.dim();
  const int n0 = mesh.n_cells();

  std::vector<SimplicialMesh::Cell> cells(n0);
  std::vector<int> origin(n0);
  for (int c = 0; c < n0; ++c) {
    cells[c] = mesh.cell(c);
    origin[c] = c;
  }
  std::vector<Vec> vertices = mesh.vertices();

  std::vector<char> flag(n0, 0);
  for (int c : marked) {
    if (c < 0 || c >= n0) throw MeshError("marked cell index out of range");
    flag[c] = 1;
  }
  if (std::none_of(flag.begin(), flag.end(), [](char f) { return f != 0; }))
    return SimplicialMesh(dim, std::move(vertices), std::move(cells), mesh.generation(),
                          std::move(origin));

  std::unordered_map<std::uint64_t, int> midpoints;
  auto midpoint = [&](int a, int b) {
    auto [it, inserted] = midpoints.try_emplace(edge_key(a, b), static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(0.5 * (vertices[a] + vertices[b]));
    return it->second;
  };

  // Each pass bisects flagged cells once; cells left with a bisected edge are
  // flagged for the next pass. Compatible initial tags make this terminate.
  constexpr int kMaxPasses = 1000;
  int pass = 0;
  for (;; ++pass) {
    if (pass == kMaxPasses) throw MeshError("bisection closure did not terminate");

    std::vector<SimplicialMesh::Cell> next;
    std::vector<int> next_origin;
    next.reserve(cells.size() + cells.size() / 2);
    next_origin.reserve(next.capacity());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!flag[c]) {
        next.push_back(cells[c]);
        next_origin.push_back(origin[c]);
        continue;
      }
      const auto& v = cells[c].vertices;
      const int k = cells[c].tag;
      const int z = midpoint(v[0], v[k]);
      const int child_tag = k > 1 ? k - 1 : dim;

      SimplicialMesh::Cell a;
      SimplicialMesh::Cell b;
      a.tag = b.tag = child_tag;
      // a = (x0, .., x_{k-1}, z, x_{k+1}, .., x_d)
      // b = (x1, .., x_k,     z, x_{k+1}, .., x_d)
      for (int i = 0; i < k; ++i) {
        a.vertices[i] = v[i];
        b.vertices[i] = v[i + 1];
      }
      a.vertices[k] = b.vertices[k] = z;
      for (int i = k + 1; i <= dim; ++i) a.vertices[i] = b.vertices[i] = v[i];
      next.push_back(a);
      next.push_back(b);
      next_origin.push_back(origin[c]);
      next_origin.push_back(origin[c]);
    }
    cells = std::move(next);
    origin = std::move(next_origin);

    flag.assign(cells.size(), 0);
    bool any = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& v = cells[c].vertices;
      for (int i = 0; i <= dim && !flag[c]; ++i)
        for (int j = i + 1; j <= dim; ++j)
          if (midpoints.count(edge_key(v[i], v[j]))) {
            flag[c] = 1;
            any = true;
            break;
          }
    }
    if (!any) break;
  }

  return SimplicialMesh(dim, std::move(vertices), std::move(cells), mesh.generation() + 1,
                        std::move(origin));
}

}  // namespace rmdg
