#include "rmdg/assembly.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace rmdg {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct FormTerms {
  bool advection_reaction = false;  // (b.grad z + gamma z, v)_K
  bool mass = false;                // (z, v)_K
  bool streamline = false;          // h_K (b.grad z, b.grad v)_K
  bool inflow = false;              // <(b.n)^- z, v> on boundary faces
  bool half_abs_boundary = false;   // 1/2 <|b.n| z, v> on boundary faces
  bool abs_boundary = false;        // <|b.n| z, v> on boundary faces
  bool central_flux = false;        // -<(b.n) [z], {v}> on interior faces
  double jump_penalty = 0.0;        // coefficient of <|b.n| [z], [v]> on interior faces
};

void add_block(Triplets& t, std::span<const int> rows, std::span<const int> cols,
               const Eigen::MatrixXd& block) {
  for (Eigen::Index i = 0; i < block.rows(); ++i)
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      if (block(i, j) != 0.0) t.emplace_back(rows[i], cols[j], block(i, j));
}

// Rows are test DOFs of `test`, columns trial DOFs of `trial`. Both spaces
// share the mesh and the local basis, so one set of basis values serves both.
SparseMatrix assemble_form(const AdvectionReactionProblem& problem, const FunctionSpace& trial,
                           const FunctionSpace& test, const FormTerms& terms) {
  check_same_mesh(trial, test);
  if (trial.degree() != test.degree()) throw SpaceError("trial and test degrees differ");
  const auto& mesh = test.mesh();
  const int nl = test.n_local();
  const int dim = mesh.dim();
  Triplets t;
  t.reserve(static_cast<std::size_t>(mesh.n_cells()) * nl * nl * 3);

  const bool any_volume = terms.advection_reaction || terms.mass || terms.streamline;
  if (any_volume) {
    CellValues cv(test, volume_quadrature_degree(test.degree()));
    Eigen::MatrixXd local(nl, nl);
    std::vector<double> bgrad(nl);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      cv.reinit(c);
      local.setZero();
      const double h = mesh.geometry(c).diameter;
      for (int q = 0; q < cv.n_points(); ++q) {
        const Vec& x = cv.point(q);
        const double w = cv.JxW(q);
        const Vec b = problem.velocity(x);
        const double gamma = terms.advection_reaction ? problem.reaction(x) : 0.0;
        for (int j = 0; j < nl; ++j) {
          double s = 0.0;
          for (int k = 0; k < dim; ++k) s += cv.gradient(q, j)(k) * b[k];
          bgrad[j] = s;
        }
        for (int i = 0; i < nl; ++i) {
          const double vi = cv.value(q, i);
          for (int j = 0; j < nl; ++j) {
            const double zj = cv.value(q, j);
            double s = 0.0;
            if (terms.advection_reaction) s += (bgrad[j] + gamma * zj) * vi;
            if (terms.mass) s += zj * vi;
            if (terms.streamline) s += h * bgrad[j] * bgrad[i];
            local(i, j) += w * s;
          }
        }
      }
      add_block(t, test.cell_dofs(c), trial.cell_dofs(c), local);
    }
  }

  const bool any_boundary = terms.inflow || terms.half_abs_boundary || terms.abs_boundary;
  if (any_boundary) {
    FaceValues fv(test, face_quadrature_degree(test.degree()));
    Eigen::MatrixXd local(nl, nl);
    for (const auto& face : mesh.boundary_faces()) {
      fv.reinit(face, face.plus_cell);
      local.setZero();
      for (int q = 0; q < fv.n_points(); ++q) {
        const double bn = problem.velocity(fv.point(q)).dot(face.normal);
        double coeff = 0.0;
        if (terms.inflow) coeff += negative_part(bn);
        if (terms.half_abs_boundary) coeff += 0.5 * std::abs(bn);
        if (terms.abs_boundary) coeff += std::abs(bn);
        if (coeff == 0.0) continue;
        const double w = fv.JxW(q) * coeff;
        for (int i = 0; i < nl; ++i)
          for (int j = 0; j < nl; ++j) local(i, j) += w * fv.value(q, i) * fv.value(q, j);
      }
      add_block(t, test.cell_dofs(face.plus_cell), trial.cell_dofs(face.plus_cell), local);
    }
  }

  const bool any_interior = terms.central_flux || terms.jump_penalty != 0.0;
  if (any_interior) {
    if (trial.kind() != SpaceKind::broken)
      throw SpaceError("interior face terms need a broken trial space");
    FaceValues plus(test, face_quadrature_degree(test.degree()));
    FaceValues minus(test, face_quadrature_degree(test.degree()));
    // Local ordering: plus-cell functions, then minus-cell functions.
    Eigen::MatrixXd local(2 * nl, 2 * nl);
    std::vector<double> jump(2 * nl), avg(2 * nl);
    std::vector<int> dofs(2 * nl);
    std::vector<int> trial_dofs(2 * nl);
    for (const auto& face : mesh.interior_faces()) {
      const int kp = face.plus_cell;
      const int km = *face.minus_cell;
      plus.reinit(face, kp);
      minus.reinit(face, km);
      local.setZero();
      for (int q = 0; q < plus.n_points(); ++q) {
        const double bn = problem.velocity(plus.point(q)).dot(face.normal);
        const double w = plus.JxW(q);
        for (int i = 0; i < nl; ++i) {
          jump[i] = plus.value(q, i);
          jump[nl + i] = -minus.value(q, i);
          avg[i] = 0.5 * plus.value(q, i);
          avg[nl + i] = 0.5 * minus.value(q, i);
        }
        for (int i = 0; i < 2 * nl; ++i)
          for (int j = 0; j < 2 * nl; ++j) {
            double s = 0.0;
            if (terms.central_flux) s -= bn * jump[j] * avg[i];
            s += terms.jump_penalty * std::abs(bn) * jump[j] * jump[i];
            local(i, j) += w * s;
          }
      }
      const auto dp = test.cell_dofs(kp), dm = test.cell_dofs(km);
      const auto tp = trial.cell_dofs(kp), tm = trial.cell_dofs(km);
      for (int i = 0; i < nl; ++i) {
        dofs[i] = dp[i];
        dofs[nl + i] = dm[i];
        trial_dofs[i] = tp[i];
        trial_dofs[nl + i] = tm[i];
      }
      add_block(t, dofs, trial_dofs, local);
    }
  }

  SparseMatrix m(test.n_dofs(), trial.n_dofs());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void require_broken(const FunctionSpace& space) {
  if (space.kind() != SpaceKind::broken) throw SpaceError("expected a broken test space");
}

}  // namespace

NormKind NormKind::up(double eta) {
  if (!(eta >= 0.0)) throw ConfigError("penalty parameter must be non-negative");
  return NormKind(Tag::up, eta);
}

NormKind NormKind::parse(const std::string& s, double eta) {
  if (s == "cf") return cf();
  if (s == "up") return up(eta);
  throw ConfigError("unknown norm '" + s + "' (expected cf or up)");
}

int volume_quadrature_degree(int degree) { return 2 * degree + 2; }
int face_quadrature_degree(int degree) { return 2 * degree + 2; }

SparseMatrix assemble_coupling(const AdvectionReactionProblem& problem, const FunctionSpace& trial,
                               const FunctionSpace& test) {
  require_broken(test);
  if (trial.kind() != SpaceKind::conforming) throw SpaceError("expected a conforming trial space");
  FormTerms terms;
  terms.advection_reaction = true;
  terms.inflow = true;
  return assemble_form(problem, trial, test, terms);
}

SparseMatrix assemble_dg_primal(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                                const NormKind& norm) {
  require_broken(space);
  FormTerms terms;
  terms.advection_reaction = true;
  terms.inflow = true;
  terms.central_flux = true;
  terms.jump_penalty = 0.5 * norm.eta();
  return assemble_form(problem, space, space, terms);
}

SparseMatrix assemble_penalty(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                              double eta) {
  require_broken(space);
  FormTerms terms;
  terms.jump_penalty = 0.5 * eta;
  if (eta == 0.0) return SparseMatrix(space.n_dofs(), space.n_dofs());
  return assemble_form(problem, space, space, terms);
}

SparseMatrix assemble_boundary_mass(const AdvectionReactionProblem& problem,
                                    const FunctionSpace& space) {
  FormTerms terms;
  terms.abs_boundary = true;
  return assemble_form(problem, space, space, terms);
}

SparseMatrix assemble_gram(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                           const NormKind& norm) {
  require_broken(space);
  FormTerms terms;
  terms.mass = true;
  terms.half_abs_boundary = true;
  if (norm.is_up()) {
    terms.streamline = true;
    terms.jump_penalty = 0.5 * norm.eta();
  }
  return assemble_form(problem, space, space, terms);
}

Eigen::VectorXd assemble_load(const AdvectionReactionProblem& problem, const FunctionSpace& space) {
  require_broken(space);
  const auto& mesh = space.mesh();
  const int nl = space.n_local();
  Eigen::VectorXd l = Eigen::VectorXd::Zero(space.n_dofs());

  CellValues cv(space, volume_quadrature_degree(space.degree()));
  for (int c = 0; c < mesh.n_cells(); ++c) {
    cv.reinit(c);
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < cv.n_points(); ++q) {
      const double f = problem.source(cv.point(q));
      if (f == 0.0) continue;
      for (int i = 0; i < nl; ++i) l[dofs[i]] += cv.JxW(q) * f * cv.value(q, i);
    }
  }

  FaceValues fv(space, face_quadrature_degree(space.degree()));
  for (const auto& face : mesh.boundary_faces()) {
    fv.reinit(face, face.plus_cell);
    const auto dofs = space.cell_dofs(face.plus_cell);
    for (int q = 0; q < fv.n_points(); ++q) {
      const double neg = negative_part(problem.velocity(fv.point(q)).dot(face.normal));
      if (neg == 0.0) continue;
      const double g = problem.inflow(fv.point(q));
      for (int i = 0; i < nl; ++i) l[dofs[i]] += fv.JxW(q) * neg * g * fv.value(q, i);
    }
  }
  return l;
}

SaddleSystem assemble_saddle(const AdvectionReactionProblem& problem, const FunctionSpace& trial,
                             const FunctionSpace& test, const NormKind& norm) {
  return {assemble_gram(problem, test, norm), assemble_coupling(problem, trial, test),
          assemble_load(problem, test), test.n_local()};
}

void write_coordinate(const SparseMatrix& m, std::ostream& os) {
  os << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace rmdg
