#include "rmdg/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#ifdef RMDG_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

namespace rmdg {

namespace {

using Clock = std::chrono::steady_clock;

// The direct path iterates the Schur CG down to round-off.
constexpr double kDirectTolerance = 1e-13;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SchurOperator {
  const SparseMatrix& B;
  const GramFactor& G;
  void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    y.noalias() = B.transpose() * G.solve(B * x);
  }
};

LinearOperator preconditioner_op(const std::optional<SchurPreconditioner>& pre) {
  if (!pre) return {};
  return [&p = *pre](const Eigen::VectorXd& r, Eigen::VectorXd& z) { p.apply(r, z); };
}

void check_system(const SaddleSystem& s) {
  if (s.G.rows() != s.G.cols() || s.B.rows() != s.G.rows() || s.l.size() != s.G.rows())
    throw SolverError("saddle system blocks have inconsistent sizes");
}

}  // namespace

SolverMode parse_solver_mode(const std::string& s) {
  if (s == "direct") return SolverMode::direct;
  if (s == "bank" || s == "bank_iterative") return SolverMode::bank_iterative;
  throw ConfigError("unknown solver mode '" + s + "'");
}

std::string to_string(SolverMode mode) {
  return mode == SolverMode::direct ? "direct" : "bank_iterative";
}

void SolverConfig::validate() const {
  if (!(cg_tol > 0.0)) throw ConfigError("cg_tol must be positive");
  if (cg_max_iter < 1) throw ConfigError("cg_max_iter must be positive");
  if (outer_iters < 1) throw ConfigError("outer_iters must be positive");
}

double ResidualReport::eps_norm() const { return std::sqrt(std::max(eps_energy, 0.0)); }

struct GramFactor::Impl {
#ifdef RMDG_HAVE_CHOLMOD
  Eigen::CholmodSimplicialLLT<SparseMatrix, Eigen::Lower> llt;
  Impl() { llt.cholmod().print = 0; }
#else
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
#endif
};

GramFactor::GramFactor(const SparseMatrix& G)
    : impl_(std::make_unique<Impl>()), n_(static_cast<int>(G.rows())) {
  if (G.rows() != G.cols()) throw SolverError("Cholesky factorization needs a square matrix");
  impl_->llt.compute(G);
  if (impl_->llt.info() != Eigen::Success)
    throw SolverError("Cholesky factorization of the Gram matrix failed (not SPD)");
}

GramFactor::GramFactor(GramFactor&&) noexcept = default;
GramFactor& GramFactor::operator=(GramFactor&&) noexcept = default;
GramFactor::~GramFactor() = default;

Eigen::VectorXd GramFactor::solve(const Eigen::VectorXd& rhs) const {
  return impl_->llt.solve(rhs);
}

const char* cholesky_backend() {
#ifdef RMDG_HAVE_CHOLMOD
  return "cholmod-simplicial";
#else
  return "eigen-simplicial";
#endif
}

CgResult conjugate_gradient(const LinearOperator& apply, const Eigen::VectorXd& rhs,
                            Eigen::VectorXd& x, double abs_tol, int max_iter,
                            const LinearOperator& precondition, CgStop stop) {
  CgResult result;
  Eigen::VectorXd r(rhs.size()), z(rhs.size()), ap(rhs.size());
  if (x.size() != rhs.size()) x = Eigen::VectorXd::Zero(rhs.size());
  apply(x, ap);
  r = rhs - ap;
  auto prec = [&] {
    if (precondition) precondition(r, z);
    else z = r;
  };
  prec();
  double rz = r.dot(z);
  auto measure = [&] {
    return stop == CgStop::residual ? r.norm() : std::sqrt(std::max(rz, 0.0));
  };
  result.residual_norm = measure();
  if (result.residual_norm <= abs_tol) {
    result.converged = true;
    return result;
  }
  Eigen::VectorXd p = z;
  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) throw SolverError("CG breakdown: operator not positive definite");
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    result.iterations = it;
    prec();
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    result.residual_norm = measure();
    if (result.residual_norm <= abs_tol) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

SchurPreconditioner::SchurPreconditioner(const SaddleSystem& system) : factor_(build(system)) {}

SparseMatrix SchurPreconditioner::build(const SaddleSystem& system) {
  const int n = static_cast<int>(system.G.rows());
  const int bs = system.test_block;
  if (bs < 1 || n % bs != 0) throw SolverError("test block size does not divide the test dimension");
  std::vector<Eigen::MatrixXd> blocks(n / bs, Eigen::MatrixXd::Zero(bs, bs));
  for (int k = 0; k < system.G.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.G, k); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (i / bs == j / bs) blocks[i / bs](i % bs, j % bs) = it.value();
    }
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(n) * bs);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Eigen::LLT<Eigen::MatrixXd> llt(blocks[b]);
    if (llt.info() != Eigen::Success) throw SolverError("Gram cell block is not SPD");
    const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(bs, bs));
    const int off = static_cast<int>(b) * bs;
    for (int i = 0; i < bs; ++i)
      for (int j = 0; j < bs; ++j) t.emplace_back(off + i, off + j, inv(i, j));
  }
  SparseMatrix dinv(n, n);
  dinv.setFromTriplets(t.begin(), t.end());
  return SparseMatrix(system.B.transpose()) * (dinv * system.B);
}

namespace {

// l - B u with extended precision accumulation; the result is small when u is
// accurate, so double accumulation would lose most of its digits.
Eigen::VectorXd load_residual(const SaddleSystem& system, const Eigen::VectorXd& u) {
  std::vector<long double> acc(system.l.data(), system.l.data() + system.l.size());
  for (int k = 0; k < system.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(system.B, k); it; ++it)
      acc[it.row()] -= static_cast<long double>(it.value()) * u[it.col()];
  Eigen::VectorXd r(system.l.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = static_cast<double>(acc[i]);
  return r;
}

constexpr double kIdentityTolerance = 1e-9;

double energy_gap(const ResidualReport& r) {
  return std::abs(r.eps_energy - r.load_dot_eps) / r.eps_energy;
}

}  // namespace

ResidualReport residual_report(const SaddleSystem& system, const GramFactor& factor,
                               const Eigen::VectorXd& eps, const Eigen::VectorXd& u) {
  ResidualReport r;
  r.orthogonality_inf = (system.B.transpose() * eps).lpNorm<Eigen::Infinity>();
  r.load_inf = system.l.lpNorm<Eigen::Infinity>();
  r.eps_energy = eps.dot(system.G * eps);
  r.load_dot_eps = system.l.dot(eps);
  r.coupling_dot_eps = (system.B * u).dot(eps);
  r.load_dual_norm = dual_norm(system.l, factor);
  return r;
}

SaddleSolution solve_saddle_direct(const SaddleSystem& system, const SolverConfig& config) {
  config.validate();
  check_system(system);
  SaddleSolution sol;
  auto t0 = Clock::now();
  const GramFactor factor(system.G);
  std::optional<SchurPreconditioner> pre;
  if (config.preconditioned) pre.emplace(system);
  sol.stats.factor_seconds = seconds_since(t0);

  t0 = Clock::now();
  const Eigen::VectorXd rhs = system.B.transpose() * factor.solve(system.l);
  const double ref = rhs.norm();
  sol.u = Eigen::VectorXd::Zero(system.B.cols());
  if (ref > 0.0) {
    const double tol = std::min(config.cg_tol, kDirectTolerance) * ref;
    const auto cg = conjugate_gradient(SchurOperator{system.B, factor}, rhs, sol.u, tol,
                                       std::max(config.cg_max_iter, 10000),
                                       preconditioner_op(pre));
    if (!cg.converged) throw SolverError("Schur complement CG did not converge");
    sol.stats.cg_iterations = cg.iterations;
    sol.stats.cg_relative_residual = cg.residual_norm / ref;
  }
  sol.eps = factor.solve(load_residual(system, sol.u));
  sol.residuals = residual_report(system, factor, sol.eps, sol.u);

  // Iterative refinement when the energy identity is at the rounding floor.
  for (int pass = 0; pass < 2 && sol.residuals.eps_energy > 0.0 &&
                     energy_gap(sol.residuals) > kIdentityTolerance;
       ++pass) {
    const Eigen::VectorXd r = system.B.transpose() * sol.eps;
    Eigen::VectorXd du = Eigen::VectorXd::Zero(r.size());
    const auto cg = conjugate_gradient(SchurOperator{system.B, factor}, r, du, 1e-6 * r.norm(),
                                       std::max(config.cg_max_iter, 10000), preconditioner_op(pre));
    sol.stats.cg_iterations += cg.iterations;
    const Eigen::VectorXd u = sol.u + du;
    const Eigen::VectorXd eps = factor.solve(load_residual(system, u));
    const ResidualReport report = residual_report(system, factor, eps, u);
    if (!(energy_gap(report) < energy_gap(sol.residuals))) break;
    sol.u = u;
    sol.eps = eps;
    sol.residuals = report;
  }
  sol.stats.solve_seconds = seconds_since(t0);
  sol.stats.outer_iterations = 1;
  return sol;
}

SaddleSolution solve_saddle_iterative(const SaddleSystem& system, const SolverConfig& config,
                                      const std::optional<SaddleGuess>& initial_guess) {
  config.validate();
  check_system(system);
  SaddleSolution sol;
  auto t0 = Clock::now();
  const GramFactor factor(system.G);
  std::optional<SchurPreconditioner> pre;
  if (config.preconditioned) pre.emplace(system);
  sol.stats.factor_seconds = seconds_since(t0);

  t0 = Clock::now();
  if (initial_guess) {
    if (initial_guess->eps.size() != system.G.rows() || initial_guess->u.size() != system.B.cols())
      throw SolverError("initial guess has the wrong size");
    sol.eps = initial_guess->eps;
    sol.u = initial_guess->u;
  } else {
    sol.eps = Eigen::VectorXd::Zero(system.G.rows());
    sol.u = Eigen::VectorXd::Zero(system.B.cols());
  }

  const double ref = (system.B.transpose() * factor.solve(system.l)).norm();
  double last_relative = 0.0;
  for (int it = 0; it < config.outer_iters; ++it) {
    const Eigen::VectorXd r = system.l - system.G * sol.eps - system.B * sol.u;
    const Eigen::VectorXd s = -(system.B.transpose() * sol.eps);
    const Eigen::VectorXd rhs = system.B.transpose() * factor.solve(r) - s;
    Eigen::VectorXd du = Eigen::VectorXd::Zero(system.B.cols());
    if (ref > 0.0) {
      const SchurOperator schur{system.B, factor};
      auto cg = conjugate_gradient(schur, rhs, du, config.cg_tol * ref, config.cg_max_iter,
                                   preconditioner_op(pre));
      if (!cg.converged) throw SolverError("Schur complement CG did not converge");
      sol.stats.cg_iterations += cg.iterations;
      last_relative = cg.residual_norm / ref;
      // the energy error of u equals that of eps; make it small relative to eps
      const Eigen::VectorXd e = sol.eps + factor.solve(r - system.B * du);
      const double e_norm = std::sqrt(std::max(e.dot(system.G * e), 0.0));
      if (e_norm > 0.0) {
        cg = conjugate_gradient(schur, rhs, du, config.cg_tol * e_norm, config.cg_max_iter,
                                preconditioner_op(pre), CgStop::preconditioned);
        if (!cg.converged) throw SolverError("Schur complement CG did not converge");
        sol.stats.cg_iterations += cg.iterations;
      }
    }
    sol.u += du;
    sol.eps = factor.solve(load_residual(system, sol.u));
    ++sol.stats.outer_iterations;
  }
  sol.stats.cg_relative_residual = last_relative;
  sol.stats.solve_seconds = seconds_since(t0);
  sol.residuals = residual_report(system, factor, sol.eps, sol.u);
  return sol;
}

SaddleSolution solve_saddle(const SaddleSystem& system, const SolverConfig& config,
                            const std::optional<SaddleGuess>& initial_guess) {
  if (config.mode == SolverMode::direct) return solve_saddle_direct(system, config);
  return solve_saddle_iterative(system, config, initial_guess);
}

Eigen::VectorXd solve_dg_primal(const SparseMatrix& A, const Eigen::VectorXd& load) {
  if (A.rows() != A.cols() || A.rows() != load.size())
    throw SolverError("DG system has inconsistent sizes");
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("DG primal matrix is singular");
  Eigen::VectorXd x = lu.solve(load);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw SolverError("DG primal solve failed");
  return x;
}

Eigen::VectorXd solve_dg_primal(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                                const NormKind& norm) {
  return solve_dg_primal(assemble_dg_primal(problem, space, norm), assemble_load(problem, space));
}

double dual_norm(const Eigen::VectorXd& l, const GramFactor& factor) {
  if (l.size() != factor.size()) throw SolverError("dual norm: size mismatch");
  return std::sqrt(std::max(l.dot(factor.solve(l)), 0.0));
}

double dual_norm(const Eigen::VectorXd& l, const SparseMatrix& G) {
  return dual_norm(l, GramFactor(G));
}

}  // namespace rmdg
