#include <doctest.h>

#include "support.hpp"

#include <cmath>

using namespace rmdg;
using rmdg::testing::point;

namespace {

// Exact integral of l0^a l1^b l2^c over the reference triangle.
double triangle_moment(int a, int b, int c) {
  return std::tgamma(a + 1) * std::tgamma(b + 1) * std::tgamma(c + 1) / std::tgamma(a + b + c + 3);
}

double tet_moment(int a, int b, int c, int d) {
  return std::tgamma(a + 1) * std::tgamma(b + 1) * std::tgamma(c + 1) * std::tgamma(d + 1) /
         std::tgamma(a + b + c + d + 4);
}

}  // namespace

TEST_CASE("quadrature rules") {
  const auto& centroid = quadrature_for(1, 2);
  CHECK(centroid.size() == 1);
  CHECK(centroid.weights[0] == doctest::Approx(0.5));

  for (int dim : {1, 2, 3}) {
    for (int deg = 0; deg <= 10; ++deg) {
      CAPTURE(dim);
      CAPTURE(deg);
      const auto& r = quadrature_for(deg, dim);
      double sum = 0.0;
      for (double w : r.weights) {
        CHECK(w > 0.0);
        sum += w;
      }
      CHECK(sum == doctest::Approx(reference_measure(dim)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(quadrature_for(11, 2), SpaceError);
  CHECK_THROWS_AS(quadrature_for(2, 4), SpaceError);
}

TEST_CASE("quadrature exactness on monomials") {
  // x^2 over the reference triangle, x = lambda_1.
  const auto& r2 = quadrature_for(2, 2);
  double xx = 0.0;
  for (std::size_t q = 0; q < r2.size(); ++q) xx += r2.weights[q] * r2.points[q][1] * r2.points[q][1];
  CHECK(xx == doctest::Approx(1.0 / 12.0).epsilon(1e-13));

  for (int deg = 0; deg <= 10; ++deg) {
    const auto& tri = quadrature_for(deg, 2);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const int c = deg - a - b;
        double s = 0.0;
        for (std::size_t q = 0; q < tri.size(); ++q)
          s += tri.weights[q] * std::pow(tri.points[q][0], a) * std::pow(tri.points[q][1], b) *
               std::pow(tri.points[q][2], c);
        CHECK(s == doctest::Approx(triangle_moment(a, b, c)).epsilon(1e-13));
      }
    const auto& tet = quadrature_for(deg, 3);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b)
        for (int c = 0; a + b + c <= deg; ++c) {
          const int d = deg - a - b - c;
          double s = 0.0;
          for (std::size_t q = 0; q < tet.size(); ++q)
            s += tet.weights[q] * std::pow(tet.points[q][0], a) * std::pow(tet.points[q][1], b) *
                 std::pow(tet.points[q][2], c) * std::pow(tet.points[q][3], d);
          CHECK(s == doctest::Approx(tet_moment(a, b, c, d)).epsilon(1e-13));
        }
  }
}

TEST_CASE("Lagrange basis") {
  const LagrangeBasis p1(2, 1);
  std::array<double, 3> bary{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 3> vals{};
  p1.values(bary, vals);
  for (double v : vals) CHECK(v == doctest::Approx(1.0 / 3.0));

  const LagrangeBasis p2(2, 2);
  CHECK(p2.size() == 6);
  // Vertex function 0 vanishes at the midpoint of the opposite edge (1,2).
  std::array<double, 3> mid{0.0, 0.5, 0.5};
  std::array<double, 6> v2{};
  p2.values(mid, v2);
  CHECK(v2[0] == doctest::Approx(0.0));
  // Nodal property.
  for (int i = 0; i < p2.size(); ++i) {
    const auto& node = p2.nodes()[i];
    p2.values(std::span<const double>(node.data(), 3), v2);
    for (int j = 0; j < p2.size(); ++j) CHECK(v2[j] == doctest::Approx(i == j ? 1.0 : 0.0));
  }
  CHECK(local_dimension(2, 1) == 3);
  CHECK(local_dimension(2, 2) == 6);
  CHECK(local_dimension(3, 1) == 4);
  CHECK(local_dimension(3, 2) == 10);
  CHECK_THROWS_AS(LagrangeBasis(2, 3), SpaceError);
}

TEST_CASE("P1 gradients on the reference triangle") {
  const std::vector<Vec> verts{point(0, 0), point(1, 0), point(0, 1)};
  const SimplicialMesh m(2, verts, {SimplicialMesh::Cell{{0, 1, 2, -1}, 2}});
  const FunctionSpace v(std::make_shared<const SimplicialMesh>(m), SpaceKind::broken, 1);
  const std::array<std::array<double, 4>, 1> pts{{{0.2, 0.3, 0.5, 0.0}}};
  const auto ev = eval_basis(v, 0, pts);
  CHECK(ev.gradients[0](0, 0) == doctest::Approx(-1.0));
  CHECK(ev.gradients[1](0, 0) == doctest::Approx(-1.0));
  CHECK(ev.gradients[0](0, 1) == doctest::Approx(1.0));
  CHECK(ev.gradients[1](0, 1) == doctest::Approx(0.0));
  CHECK(ev.gradients[0](0, 2) == doctest::Approx(0.0));
  CHECK(ev.gradients[1](0, 2) == doctest::Approx(1.0));
}

TEST_CASE("space dimensions on the two-triangle mesh") {
  const auto m = testing::square(1);
  CHECK(build_space(m, SpaceKind::broken, 1).n_dofs() == 6);
  CHECK(build_space(m, SpaceKind::conforming, 1).n_dofs() == 4);
  CHECK(build_space(m, SpaceKind::conforming, 2).n_dofs() == 9);
  CHECK(build_space(m, SpaceKind::broken, 2).n_dofs() == 12);
  CHECK_THROWS_AS(build_space(m, SpaceKind::broken, 0), SpaceError);

  const auto c = testing::cube(2);
  CHECK(build_space(c, SpaceKind::broken, 2).n_dofs() == 48 * 10);
  CHECK(build_space(c, SpaceKind::conforming, 1).n_dofs() == 27);
  CHECK(build_space(c, SpaceKind::conforming, 2).n_dofs() == 125);
}

TEST_CASE("embedded conforming functions have no jumps") {
  for (int dim : {2, 3}) {
    for (int p : {1, 2}) {
      CAPTURE(dim);
      CAPTURE(p);
      auto mesh = dim == 2 ? testing::square(3) : testing::cube(2);
      // A locally refined mesh exercises bisected faces too.
      const std::vector<int> marked{0, 1};
      mesh = std::make_shared<const SimplicialMesh>(bisect_refine(*mesh, marked));
      const auto u = build_space(mesh, SpaceKind::conforming, p);
      const auto v = build_space(mesh, SpaceKind::broken, p);
      const Eigen::VectorXd c = testing::random_vector(u.n_dofs(), 11);
      const Eigen::VectorXd e = embed_conforming(u, v, c);
      CHECK((embedding_matrix(u, v) * c - e).norm() == doctest::Approx(0.0));
      FaceValues plus(v, 2 * p + 2), minus(v, 2 * p + 2);
      double worst = 0.0;
      for (const auto& f : mesh->interior_faces()) {
        plus.reinit(f, f.plus_cell);
        minus.reinit(f, *f.minus_cell);
        const auto dp = v.cell_dofs(f.plus_cell);
        const auto dm = v.cell_dofs(*f.minus_cell);
        for (int q = 0; q < plus.n_points(); ++q) {
          REQUIRE((plus.point(q) - minus.point(q)).norm() < 1e-14);
          double a = 0.0, b = 0.0;
          for (int i = 0; i < v.n_local(); ++i) {
            a += e[dp[i]] * plus.value(q, i);
            b += e[dm[i]] * minus.value(q, i);
          }
          worst = std::max(worst, std::abs(a - b));
        }
      }
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("polynomial reproduction by interpolation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int p : {1, 2}) {
    const auto mesh = testing::square(4);
    const auto u = build_space(mesh, SpaceKind::conforming, p);
    auto poly = [p](const Vec& x) {
      const double lin = 0.3 - 1.2 * x[0] + 2.5 * x[1];
      return p == 1 ? lin : lin + 0.7 * x[0] * x[0] - 1.1 * x[0] * x[1] + 0.4 * x[1] * x[1];
    };
    const Eigen::VectorXd c = interpolate(u, poly);
    for (int k = 0; k < 50; ++k) {
      const int cell = static_cast<int>(unif(rng) * mesh->n_cells());
      double l0 = unif(rng), l1 = unif(rng) * (1 - l0);
      const auto verts = mesh->cell_vertices(cell);
      const Vec x = l0 * mesh->vertex(verts[0]) + l1 * mesh->vertex(verts[1]) +
                    (1 - l0 - l1) * mesh->vertex(verts[2]);
      CHECK(evaluate(u, c, cell, x) == doctest::Approx(poly(x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("spaces on different meshes are rejected") {
  const auto a = build_space(testing::square(2), SpaceKind::conforming, 1);
  const auto b = build_space(testing::square(2), SpaceKind::broken, 1);
  CHECK_THROWS_AS(embedding_matrix(a, b), SpaceError);
}
