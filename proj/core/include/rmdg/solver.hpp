#pragma once

#include "rmdg/assembly.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace rmdg {

enum class SolverMode { direct, bank_iterative };

SolverMode parse_solver_mode(const std::string& s);
std::string to_string(SolverMode mode);

struct SolverConfig {
  SolverMode mode = SolverMode::direct;
  double cg_tol = 1e-10;
  int cg_max_iter = 2000;
  int outer_iters = 1;
  // Precondition the Schur CG with B^T D^{-1} B, D the cell blocks of G.
  bool preconditioned = true;

  void validate() const;
};

struct SolverStats {
  int cg_iterations = 0;
  int outer_iterations = 0;
  double cg_relative_residual = 0.0;
  double factor_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Algebraic checks on (eps, u): orthogonality B^T eps = 0 and the energy
/// identity eps^T G eps = l^T eps - (B u)^T eps.
struct ResidualReport {
  double orthogonality_inf = 0.0;  // |B^T eps|_inf
  double load_inf = 0.0;           // |l|_inf
  double eps_energy = 0.0;         // eps^T G eps
  double load_dot_eps = 0.0;       // l^T eps
  double coupling_dot_eps = 0.0;   // (B u)^T eps
  double load_dual_norm = 0.0;     // sqrt(l^T G^{-1} l)

  double eps_norm() const;
};

struct SaddleSolution {
  Eigen::VectorXd eps;
  Eigen::VectorXd u;
  ResidualReport residuals;
  SolverStats stats;
};

/// Sparse Cholesky of the Gram matrix with a fill-reducing ordering
/// (CHOLMOD when available, otherwise Eigen's simplicial LLT with
/// AMD).
class GramFactor {
 public:
  explicit GramFactor(const SparseMatrix& G);
  GramFactor(GramFactor&&) noexcept;
  GramFactor& operator=(GramFactor&&) noexcept;
  ~GramFactor();

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  int size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int n_;
};

/// Name of the sparse Cholesky backend compiled in.
const char* cholesky_backend();

struct CgResult {
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

enum class CgStop {
  residual,        // |r|
  preconditioned,  // sqrt(r^T M^{-1} r), an energy-error estimate when M ~ A
};

/// Conjugate gradients on a symmetric positive definite operator. Stops when
/// the chosen residual measure drops to abs_tol; x holds the initial guess on
/// entry. An empty preconditioner means the identity.
CgResult conjugate_gradient(const LinearOperator& apply, const Eigen::VectorXd& rhs,
                            Eigen::VectorXd& x, double abs_tol, int max_iter,
                            const LinearOperator& precondition = {},
                            CgStop stop = CgStop::residual);

/// Cholesky factor of B^T D^{-1} B where D keeps the diagonal cell blocks of
/// G. Exact for block diagonal G (the cf norm).
class SchurPreconditioner {
 public:
  explicit SchurPreconditioner(const SaddleSystem& system);
  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const { z = factor_.solve(r); }

 private:
  static SparseMatrix build(const SaddleSystem& system);
  GramFactor factor_;
};

/// Schur complement solve: S u = B^T G^{-1} l with S = B^T G^{-1} B by CG using
/// exact G solves, then eps = G^{-1} (l - B u). CG runs to a relative residual
/// of min(cg_tol, 1e-13).
SaddleSolution solve_saddle_direct(const SaddleSystem& system, const SolverConfig& config = {});

/// Initial guess (eps, u) for the preconditioned iteration.
struct SaddleGuess {
  Eigen::VectorXd eps;
  Eigen::VectorXd u;
};

/// Bank-type iteration with G-hat the exact Cholesky factor of G and S-hat
/// applied by CG. Each outer step computes the residuals r = l - G eps - B u,
/// s = -B^T eps, then the increments
///   d_u   = S^{-1} (B^T G^{-1} r - s),
///   d_eps = G^{-1} (r - B d_u).
/// The CG stopping threshold is cg_tol times |B^T G^{-1} l|, so a good warm
/// start needs fewer inner iterations.
SaddleSolution solve_saddle_iterative(const SaddleSystem& system, const SolverConfig& config,
                                      const std::optional<SaddleGuess>& initial_guess = std::nullopt);

SaddleSolution solve_saddle(const SaddleSystem& system, const SolverConfig& config,
                            const std::optional<SaddleGuess>& initial_guess = std::nullopt);

ResidualReport residual_report(const SaddleSystem& system, const GramFactor& factor,
                               const Eigen::VectorXd& eps, const Eigen::VectorXd& u);

/// Square DG system (b_h + p_h) theta = l by sparse LU.
Eigen::VectorXd solve_dg_primal(const SparseMatrix& A, const Eigen::VectorXd& load);
Eigen::VectorXd solve_dg_primal(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                                const NormKind& norm);

/// sqrt(l^T G^{-1} l), the norm of l in the dual of (V_h, G).
double dual_norm(const Eigen::VectorXd& l, const SparseMatrix& G);
double dual_norm(const Eigen::VectorXd& l, const GramFactor& factor);

}  // namespace rmdg
