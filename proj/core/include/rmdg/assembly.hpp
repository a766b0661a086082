#pragma once

#include "rmdg/problem.hpp"
#include "rmdg/space.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>

namespace rmdg {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Test-space norm: centered fluxes (cf, no penalty) or upwind fluxes (up).
class NormKind {
 public:
  enum class Tag { cf, up };

  static NormKind cf() { return NormKind(Tag::cf, 0.0); }
  static NormKind up(double eta = 1.0);
  static NormKind parse(const std::string& s, double eta = 1.0);

  Tag tag() const { return tag_; }
  double eta() const { return eta_; }
  bool is_up() const { return tag_ == Tag::up; }
  std::string name() const { return is_up() ? "up" : "cf"; }

 private:
  NormKind(Tag tag, double eta) : tag_(tag), eta_(eta) {}
  Tag tag_;
  double eta_;
};

/// Algebraic form of the residual minimization: [G B; B^T 0] [eps; u] = [l; 0].
struct SaddleSystem {
  SparseMatrix G;    // Gram matrix of the test norm, n_test x n_test
  SparseMatrix B;    // coupling b_h(trial_j, test_i), n_test x n_trial
  Eigen::VectorXd l; // load l_h(test_i)
  int test_block = 1; // test dofs come in contiguous per-cell blocks of this size
};

int volume_quadrature_degree(int degree);
int face_quadrature_degree(int degree);

/// b_h on U_h x V_h: volume advection-reaction term plus inflow boundary term.
/// Jump terms vanish for continuous trial functions and are not assembled.
SparseMatrix assemble_coupling(const AdvectionReactionProblem& problem, const FunctionSpace& trial,
                               const FunctionSpace& test);

/// Full DG form b_h + p_h on V_h x V_h with the penalty of `norm`.
SparseMatrix assemble_dg_primal(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                                const NormKind& norm);

/// (eta/2) sum over interior faces of <|b.n| [z], [v]>.
SparseMatrix assemble_penalty(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                              double eta);

/// sum over boundary faces of <|b.n| z, v>.
SparseMatrix assemble_boundary_mass(const AdvectionReactionProblem& problem,
                                    const FunctionSpace& space);

/// Gram matrix of the cf or up inner product on V_h.
SparseMatrix assemble_gram(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                           const NormKind& norm);

/// l_h(v) = (f, v) + sum over boundary faces of <(b.n)^- g, v>.
Eigen::VectorXd assemble_load(const AdvectionReactionProblem& problem, const FunctionSpace& space);

SaddleSystem assemble_saddle(const AdvectionReactionProblem& problem, const FunctionSpace& trial,
                             const FunctionSpace& test, const NormKind& norm);

/// Coordinate text dump, one "row col value" triple per line.
void write_coordinate(const SparseMatrix& m, std::ostream& os);

}  // namespace rmdg
