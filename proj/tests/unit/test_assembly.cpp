#include <doctest.h>

#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <set>

using namespace rmdg;
using rmdg::testing::point;

namespace {

std::shared_ptr<const SimplicialMesh> reference_triangle() {
  const std::vector<Vec> verts{point(0, 0), point(1, 0), point(0, 1)};
  return std::make_shared<const SimplicialMesh>(
      SimplicialMesh(2, verts, {SimplicialMesh::Cell{{0, 1, 2, -1}, 2}}));
}

double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

std::shared_ptr<const SimplicialMesh> graded_square() {
  auto m = testing::square(3);
  for (int k = 0; k < 3; ++k) {
    std::vector<int> marked;
    for (int c = 0; c < m->n_cells(); ++c)
      if (m->centroid(c)[0] < 0.3) marked.push_back(c);
    m = std::make_shared<const SimplicialMesh>(bisect_refine(*m, marked));
  }
  return m;
}

}  // namespace

TEST_CASE("coupling on the reference triangle") {
  const auto mesh = reference_triangle();
  const auto u = build_space(mesh, SpaceKind::conforming, 1);
  const auto v = build_space(mesh, SpaceKind::broken, 1);

  SUBCASE("pure advection b = (1, 0)") {
    const auto p = testing::constant_problem(point(1, 0), 0.0, 0.0, 0.0);
    const Eigen::MatrixXd B(assemble_coupling(p, u, v));
    // Volume part (b.grad phi_j, phi_i) = (1/6) [-1, 1, 0]; the inflow edge
    // x = 0 joins vertices 0 and 2 and adds its P1 edge mass matrix.
    Eigen::MatrixXd expected(3, 3);
    for (int i = 0; i < 3; ++i) expected.row(i) << -1, 1, 0;
    expected /= 6.0;
    expected(0, 0) += 2.0 / 6.0;
    expected(0, 2) += 1.0 / 6.0;
    expected(2, 0) += 1.0 / 6.0;
    expected(2, 2) += 2.0 / 6.0;
    CHECK((B - expected).norm() <= 1e-14);
  }
  SUBCASE("pure reaction") {
    const auto p = testing::constant_problem(point(0, 0), 1.0, 0.0, 0.0);
    const Eigen::MatrixXd B(assemble_coupling(p, u, v));
    Eigen::MatrixXd mass = Eigen::MatrixXd::Constant(3, 3, 1.0);
    mass.diagonal().setConstant(2.0);
    mass *= 0.5 / 12.0;
    CHECK((B - mass).norm() <= 1e-15);
  }
}

TEST_CASE("coupling of the constant trial function is the inflow integral") {
  const auto b = make_benchmark("tanh2d", 5.0);
  const auto mesh = testing::square(4);
  const auto u = build_space(mesh, SpaceKind::conforming, 1);
  const auto v = build_space(mesh, SpaceKind::broken, 1);
  const Eigen::VectorXd row = assemble_coupling(b.problem, u, v) * Eigen::VectorXd::Ones(u.n_dofs());
  // Sum over test functions = integral of |b.n| over the inflow sides = 3 + 1.
  CHECK(row.sum() == doctest::Approx(4.0).epsilon(1e-13));
  for (int c = 0; c < mesh->n_cells(); ++c) {
    bool touches = false;
    for (int vtx : mesh->cell_vertices(c)) {
      const Vec& x = mesh->vertex(vtx);
      touches |= x[0] == 0.0 || x[1] == 0.0;
    }
    if (touches) continue;
    for (int d : v.cell_dofs(c)) CHECK(row[d] == doctest::Approx(0.0));
  }
}

TEST_CASE("DG form on the two-triangle square") {
  const auto mesh = testing::square(1);
  const auto v = build_space(mesh, SpaceKind::broken, 1);
  const auto p = testing::constant_problem(point(3, 1), 0.0, 0.0, 0.0);
  const Face& e = mesh->interior_faces().at(0);
  const int kp = e.plus_cell, km = *e.minus_cell;
  const double bn = point(3, 1).dot(e.normal);
  CHECK(std::abs(bn) == doctest::Approx(std::sqrt(2.0)));
  const double len = std::sqrt(2.0);

  auto indicator = [&](int cell) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(v.n_dofs());
    for (int d : v.cell_dofs(cell)) x[d] = 1.0;
    return x;
  };
  const Eigen::VectorXd zp = indicator(kp), zm = indicator(km);
  for (double eta : {0.0, 1.0, 2.5}) {
    CAPTURE(eta);
    const auto A = assemble_dg_primal(p, v, eta == 0.0 ? NormKind::cf() : NormKind::up(eta));
    // Row v = 1_{K-}, column z = 1_{K+}: [z] = 1, {v} = 1/2, [v] = -1.
    const double central_mp = -bn * 1.0 * 0.5 * len;
    const double penalty_mp = 0.5 * eta * std::abs(bn) * 1.0 * (-1.0) * len;
    CHECK(zm.dot(A * zp) == doctest::Approx(central_mp + penalty_mp));
    // Row v = 1_{K+}, column z = 1_{K-}: [z] = -1, {v} = 1/2, [v] = 1.
    const double central_pm = -bn * (-1.0) * 0.5 * len;
    CHECK(zp.dot(A * zm) == doctest::Approx(central_pm + penalty_mp));
  }
}

TEST_CASE("coercivity identity for divergence free advection") {
  struct Case {
    std::shared_ptr<const SimplicialMesh> mesh;
    AdvectionReactionProblem problem;
  };
  std::vector<Case> cases;
  cases.push_back({graded_square(), make_benchmark("tanh2d", 5.0).problem});
  // Linear, divergence free; every integrand stays polynomial.
  AdvectionReactionProblem linear3d = make_benchmark("spiral3d", 10.0).problem;
  linear3d.velocity = [](const Vec& x) { return point(0.3 + x[1], 0.2 + x[2], 1.0 + x[0]); };
  std::vector<int> marked{0, 5, 17};
  cases.push_back({std::make_shared<const SimplicialMesh>(bisect_refine(*testing::cube(2), marked)),
                   linear3d});
  for (auto& cs : cases) {
    for (int p : {1, 2}) {
      const auto v = build_space(cs.mesh, SpaceKind::broken, p);
      const auto boundary = assemble_boundary_mass(cs.problem, v);
      for (double eta : {0.0, 1.0}) {
        const NormKind norm = eta == 0.0 ? NormKind::cf() : NormKind::up(eta);
        const auto A = assemble_dg_primal(cs.problem, v, norm);
        const auto P = assemble_penalty(cs.problem, v, eta);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
          const Eigen::VectorXd x = testing::random_vector(v.n_dofs(), 1000 + k);
          const double lhs = x.dot(A * x);
          const double rhs = 0.5 * x.dot(boundary * x) + x.dot(P * x);
          worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
        CAPTURE(cs.mesh->dim());
        CAPTURE(p);
        CAPTURE(eta);
        CHECK(worst <= 1e-11);
      }
    }
  }
}

TEST_CASE("coercivity identity for the helical field holds up to quadrature error") {
  // The spiral field is not polynomial, so the identity degrades with the
  // quadrature error and recovers under refinement.
  const auto problem = make_benchmark("spiral3d", 10.0).problem;
  double previous = 1e300;
  for (int n : {2, 4, 8}) {
    const auto v = build_space(testing::cube(n), SpaceKind::broken, 1);
    const auto A = assemble_dg_primal(problem, v, NormKind::up());
    const SparseMatrix rhs_matrix = 0.5 * assemble_boundary_mass(problem, v) + assemble_penalty(problem, v, 1.0);
    const Eigen::VectorXd x = testing::random_vector(v.n_dofs(), 77);
    const double gap = std::abs(x.dot(A * x) - x.dot(rhs_matrix * x)) / x.dot(rhs_matrix * x);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("DG form on embedded continuous functions reduces to the coupling") {
  const auto b = make_benchmark("tanh2d", 5.0);
  const auto mesh = graded_square();
  for (int p : {1, 2}) {
    const auto u = build_space(mesh, SpaceKind::conforming, p);
    const auto v = build_space(mesh, SpaceKind::broken, p);
    const auto E = embedding_matrix(u, v);
    const auto A = assemble_dg_primal(b.problem, v, NormKind::up());
    const auto B = assemble_coupling(b.problem, u, v);
    const Eigen::VectorXd c = testing::random_vector(u.n_dofs(), 21);
    CHECK((A * (E * c) - B * c).norm() <= 1e-12 * (B * c).norm());
    CHECK((assemble_penalty(b.problem, v, 1.0) * (E * c)).norm() <= 1e-12 * c.norm());
  }
}

TEST_CASE("flux consistency: penalty is the only eta dependence") {
  const auto b = make_benchmark("tanh2d", 5.0);
  const auto v = build_space(graded_square(), SpaceKind::broken, 2);
  const SparseMatrix a0 = assemble_dg_primal(b.problem, v, NormKind::cf());
  const SparseMatrix a1 = assemble_dg_primal(b.problem, v, NormKind::up(1.0));
  const SparseMatrix p1 = assemble_penalty(b.problem, v, 1.0);
  CHECK(max_abs(a1 - p1 - a0) <= 1e-12 * max_abs(a1));
}

TEST_CASE("Gram matrices") {
  const auto b = make_benchmark("tanh2d", 5.0);
  const auto mesh = graded_square();
  const auto u = build_space(mesh, SpaceKind::conforming, 1);
  const auto v = build_space(mesh, SpaceKind::broken, 1);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(v.n_dofs());
  const auto gcf = assemble_gram(b.problem, v, NormKind::cf());
  const auto gup = assemble_gram(b.problem, v, NormKind::up());
  // |D| + (1/2) integral of |b.n| over the boundary = 1 + (3 + 1 + 3 + 1) / 2.
  CHECK(one.dot(gcf * one) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(one.dot(gup * one) == doctest::Approx(5.0).epsilon(1e-13));

  for (const auto* g : {&gcf, &gup}) {
    CHECK(max_abs(SparseMatrix(g->transpose()) - *g) <= 1e-12 * max_abs(*g));
    CHECK_NOTHROW(GramFactor{*g});
  }
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = testing::random_vector(v.n_dofs(), 300 + k);
    CHECK(x.dot(gup * x) >= x.dot(gcf * x));
  }
  // cf couples nothing across faces.
  for (int k = 0; k < gcf.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(gcf, k); it; ++it)
      CHECK(it.row() / v.n_local() == it.col() / v.n_local());

  // up couples only face neighbours.
  std::set<std::pair<int, int>> neighbours;
  for (const auto& f : mesh->interior_faces()) {
    neighbours.insert({f.plus_cell, *f.minus_cell});
    neighbours.insert({*f.minus_cell, f.plus_cell});
  }
  for (int k = 0; k < gup.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(gup, k); it; ++it) {
      const int a = static_cast<int>(it.row()) / v.n_local();
      const int c = static_cast<int>(it.col()) / v.n_local();
      CHECK((a == c || neighbours.count({a, c}) == 1));
    }

  // B has no zero columns.
  const auto B = assemble_coupling(b.problem, u, v);
  Eigen::VectorXd colsum = Eigen::VectorXd::Zero(u.n_dofs());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) colsum[it.col()] += std::abs(it.value());
  CHECK(colsum.minCoeff() > 0.0);
}

TEST_CASE("load vectors") {
  const auto mesh = testing::square(4);
  const auto v = build_space(mesh, SpaceKind::broken, 1);
  CHECK(assemble_load(testing::constant_problem(point(3, 1), 0, 0, 0), v).norm() == 0.0);
  CHECK(assemble_load(testing::constant_problem(point(3, 1), 0, 1, 0), v).sum() ==
        doctest::Approx(1.0).epsilon(1e-13));
  // g = 1 adds the inflow measure weighted by |b.n|.
  CHECK(assemble_load(testing::constant_problem(point(3, 1), 0, 0, 1), v).sum() ==
        doctest::Approx(4.0).epsilon(1e-13));

  const auto b = make_benchmark("tanh2d", 5.0);
  const Eigen::VectorXd l = assemble_load(b.problem, v);
  for (int c = 0; c < mesh->n_cells(); ++c) {
    bool inflow = false;
    for (const auto& f : mesh->boundary_faces())
      if (f.plus_cell == c && b.problem.velocity(mesh->centroid(c)).dot(f.normal) < 0) inflow = true;
    for (int d : v.cell_dofs(c)) {
      if (!inflow) CHECK(l[d] == 0.0);
    }
  }
  CHECK(l.norm() > 0.0);
}

TEST_CASE("assembly is deterministic") {
  const auto b = make_benchmark("spiral3d", 10.0);
  const auto mesh = testing::cube(2);
  const auto v = build_space(mesh, SpaceKind::broken, 1);
  const auto g1 = assemble_gram(b.problem, v, NormKind::up());
  const auto g2 = assemble_gram(b.problem, v, NormKind::up());
  CHECK(max_abs(g1 - g2) == 0.0);
}
