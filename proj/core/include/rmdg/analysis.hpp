#pragma once

#include "rmdg/assembly.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rmdg {

enum class ErrorKind { L2, cf, up, cf_sharp, up_sharp };

/// Squared pieces of the cf/up norms and their sharp extensions for one
/// function w (or u - w_h), summed over the mesh.
struct NormTerms {
  double volume = 0.0;          // sum ||w||_K^2
  double boundary = 0.0;        // 1/2 || |b.n|^{1/2} w ||_Gamma^2
  double jump = 0.0;            // eta/2 sum over interior faces || |b.n|^{1/2} [w] ||_e^2
  double streamline = 0.0;      // sum h_K || b.grad w ||_K^2
  double advection = 0.0;       // sum || b.grad w ||_K^2
  double trace_scaled = 0.0;    // sum h_K^{-1} ||w||_{dK}^2
  double trace = 0.0;           // sum ||w||_{dK}^2
  double volume_scaled = 0.0;   // sum h_K^{-1} ||w||_K^2

  double L2() const;
  double cf() const;
  double up() const;
  double cf_sharp() const;
  double up_sharp() const;
  double get(ErrorKind kind) const;
};

/// Norm pieces of exact - w_h, where w_h lives in `space` (broken or
/// conforming). Without `exact` the norms of w_h itself are computed.
/// quad_degree < 0 selects the elevated rule 2p + 4.
NormTerms norm_terms(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                     const Eigen::VectorXd& coeffs, const ExactSolution* exact, double eta,
                     int quad_degree = -1);

double error_norm(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                  const Eigen::VectorXd& coeffs, ErrorKind kind, double eta = 1.0);

struct ErrorReport {
  double err_L2 = 0.0;
  double err_cf = 0.0;
  double err_up = 0.0;
  double err_cf_sharp = 0.0;
  double err_up_sharp = 0.0;
};

ErrorReport error_report(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                         const Eigen::VectorXd& coeffs, double eta = 1.0);

/// S = |u - theta_h|_up / |u - u_h|_up, W = |u - theta_h|_up / |theta_h - u_h|_up.
/// A ratio whose denominator is below 1e-14 is undefined.
struct SaturationRecord {
  std::optional<double> S;
  std::optional<double> W;
  bool saturated() const { return S && *S < 1.0; }
};

SaturationRecord saturation_ratios(const AdvectionReactionProblem& problem,
                                   const FunctionSpace& trial, const Eigen::VectorXd& u_h,
                                   const FunctionSpace& test, const Eigen::VectorXd& theta_h,
                                   double eta = 1.0);

SaturationRecord saturation_from_norms(double err_theta, double err_u, double theta_minus_u);

/// Node averaging of a broken function onto the conforming space of the
/// same degree.
Eigen::VectorXd oswald_average(const FunctionSpace& broken, const Eigen::VectorXd& v,
                               const FunctionSpace& conforming);

/// Per-cell ratios ||v - avg(v)||_K^2 / (h_K sum_{e in S_K, interior} ||[v]||_e^2),
/// S_K being the interior faces that touch the closure of K. Returns the
/// largest ratio; throws when a cell has zero jump energy but nonzero LHS.
struct OswaldCheck {
  double max_ratio = 0.0;
  double max_lhs = 0.0;
};

OswaldCheck oswald_ratio(const FunctionSpace& broken, const FunctionSpace& conforming,
                         const Eigen::VectorXd& v);

double oswald_inequality_check(std::shared_ptr<const SimplicialMesh> mesh, int degree, int trials,
                               std::uint64_t seed = 20240611);

struct RateSummary {
  std::vector<double> slopes;  // per segment, in log(error)/log(dofs)
  double fitted = 0.0;         // least squares over the last `window` points
};

RateSummary convergence_rates(const std::vector<double>& dofs, const std::vector<double>& errors,
                              int window = 3);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace rmdg
