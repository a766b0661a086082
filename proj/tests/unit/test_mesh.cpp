#include <doctest.h>

#include "support.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace rmdg;
using rmdg::testing::point;

namespace {

// Independent face count: every cell face keyed by its sorted vertex set.
std::map<std::vector<int>, int> face_incidence(const SimplicialMesh& m) {
  std::map<std::vector<int>, int> count;
  for (int c = 0; c < m.n_cells(); ++c) {
    const auto v = m.cell_vertices(c);
    for (int skip = 0; skip <= m.dim(); ++skip) {
      std::vector<int> f;
      for (int i = 0; i <= m.dim(); ++i)
        if (i != skip) f.push_back(v[i]);
      std::sort(f.begin(), f.end());
      ++count[f];
    }
  }
  return count;
}

void check_conforming(const SimplicialMesh& m) {
  int boundary = 0, interior = 0;
  for (const auto& [f, n] : face_incidence(m)) {
    REQUIRE(n <= 2);
    (n == 2 ? interior : boundary)++;
  }
  CHECK(interior == static_cast<int>(m.interior_faces().size()));
  CHECK(boundary == static_cast<int>(m.boundary_faces().size()));
  CHECK(m.conformity_audit());
}

void check_orientation(const SimplicialMesh& m) {
  for (const auto& f : m.interior_faces()) {
    REQUIRE(f.minus_cell);
    CHECK(f.plus_cell < *f.minus_cell);
    const Vec d = m.centroid(*f.minus_cell) - m.centroid(f.plus_cell);
    CHECK(f.normal.dot(d) > 0.0);
    CHECK(f.normal.norm() == doctest::Approx(1.0));
  }
  for (const auto& f : m.boundary_faces()) {
    const Vec d = m.vertex(f.vertices[0]) - m.centroid(f.plus_cell);
    CHECK(f.normal.dot(d) > 0.0);
  }
}

}  // namespace

TEST_CASE("structured square and cube meshes") {
  SUBCASE("n=1 square") {
    const auto m = build_structured_mesh(2, 1);
    CHECK(m.n_cells() == 2);
    CHECK(m.interior_faces().size() == 1);
    CHECK(m.boundary_faces().size() == 4);
    const Vec n = m.interior_faces()[0].normal;
    CHECK(std::abs(n[0]) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(n[0] == doctest::Approx(-n[1]));
  }
  SUBCASE("n=2 square") {
    const auto m = build_structured_mesh(2, 2);
    CHECK(m.n_cells() == 8);
    CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.interior_faces().size() == 8);
    CHECK(m.boundary_faces().size() == 8);
    check_conforming(m);
    check_orientation(m);
  }
  SUBCASE("n=1 cube") {
    const auto m = build_structured_mesh(3, 1);
    CHECK(m.n_cells() == 6);
    CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
    for (int c = 0; c < 6; ++c) CHECK(m.geometry(c).volume == doctest::Approx(1.0 / 6.0));
    check_conforming(m);
  }
  SUBCASE("n=3 cube") {
    const auto m = build_structured_mesh(3, 3);
    CHECK(m.n_cells() == 162);
    CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
    check_conforming(m);
    check_orientation(m);
  }
  CHECK_THROWS_AS(build_structured_mesh(2, 0), MeshError);
  CHECK_THROWS_AS(build_structured_mesh(4, 2), MeshError);
}

TEST_CASE("cell geometry") {
  const std::vector<Vec> tri{point(0, 0), point(1, 0), point(0, 1)};
  const auto g = cell_geometry(2, tri);
  CHECK(g.diameter == doctest::Approx(std::sqrt(2.0)));
  CHECK(g.volume == doctest::Approx(0.5));
  // Outward normal opposite vertex 0 is (1,1)/sqrt(2).
  CHECK(g.face_normals(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g.face_normals(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g.face_normals(1, 0) == doctest::Approx(-1.0));
  CHECK(g.face_normals(2, 1) == doctest::Approx(-1.0));

  const std::vector<Vec> big{point(0, 0), point(2, 0), point(0, 2)};
  const auto g2 = cell_geometry(2, big);
  CHECK(g2.diameter == doctest::Approx(2.0 * g.diameter));
  CHECK(g2.volume == doctest::Approx(4.0 * g.volume));

  const std::vector<Vec> kuhn{point(0, 0, 0), point(1, 0, 0), point(1, 1, 0), point(1, 1, 1)};
  CHECK(cell_geometry(3, kuhn).volume == doctest::Approx(1.0 / 6.0));

  const std::vector<Vec> flat{point(0, 0), point(1, 1), point(2, 2)};
  CHECK_THROWS_AS(cell_geometry(2, flat), MeshError);
}

TEST_CASE("bisection on the two-triangle square") {
  const auto m = build_structured_mesh(2, 1);
  SUBCASE("mark both") {
    const std::vector<int> marked{0, 1};
    const auto r = bisect_refine(m, marked);
    CHECK(r.n_cells() == 4);
    CHECK(r.n_vertices() == 5);
    check_conforming(r);
  }
  SUBCASE("mark one") {
    const std::vector<int> marked{0};
    const auto r = bisect_refine(m, marked);
    CHECK(r.n_cells() >= 3);
    check_conforming(r);
    CHECK(r.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("mark none") {
    const auto r = bisect_refine(m, {});
    REQUIRE(r.n_cells() == m.n_cells());
    for (int c = 0; c < m.n_cells(); ++c)
      for (int i = 0; i < 3; ++i) CHECK(r.cell(c).vertices[i] == m.cell(c).vertices[i]);
  }
  SUBCASE("out of range") {
    const std::vector<int> marked{7};
    CHECK_THROWS_AS(bisect_refine(m, marked), MeshError);
  }
}

TEST_CASE("refinement cascades stay conforming and shape regular") {
  for (int dim : {2, 3}) {
    CAPTURE(dim);
    SimplicialMesh m = build_structured_mesh(dim, 2);
    const double floor0 = m.min_shape_ratio();
    std::mt19937_64 rng(7);
    double worst = floor0;
    for (int level = 0; level < 10; ++level) {
      // Refine near one corner and a random sprinkle elsewhere.
      std::vector<int> marked{0};
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int c = 0; c < m.n_cells(); ++c)
        if (c > 0 && (m.centroid(c).norm() < 0.3 || u(rng) < 0.05)) marked.push_back(c);
      const auto parent_cells = m.n_cells();
      m = bisect_refine(m, marked);
      CHECK(m.n_cells() > parent_cells);
      CHECK(m.parents().size() == static_cast<std::size_t>(m.n_cells()));
      CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
      worst = std::min(worst, m.min_shape_ratio());
      if (dim == 3 && m.n_cells() > 20000) break;
    }
    check_conforming(m);
    check_orientation(m);
    // Newest vertex bisection has finitely many similarity classes.
    CHECK(worst > 0.2 * floor0);
  }
}

TEST_CASE("uniform bisection of a structured square gives the finer structured count") {
  auto m = build_structured_mesh(2, 2);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<int> all(m.n_cells());
    std::iota(all.begin(), all.end(), 0);
    m = bisect_refine(m, all);
  }
  CHECK(m.n_cells() == 32);
  CHECK(m.n_vertices() == 25);
}

TEST_CASE("mesh dump format") {
  const auto m = build_structured_mesh(2, 1);
  std::ostringstream os;
  m.write(os);
  std::istringstream is(os.str());
  int dim, nv, nc;
  is >> dim >> nv >> nc;
  CHECK(dim == 2);
  CHECK(nv == 4);
  CHECK(nc == 2);
  double x, y;
  for (int i = 0; i < nv; ++i) {
    is >> x >> y;
    CHECK(x == m.vertex(i)[0]);
  }
  int a, b, c;
  is >> a >> b >> c;
  CHECK(a == m.cell(0).vertices[0]);
  CHECK(is);
}
