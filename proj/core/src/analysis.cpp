#include "rmdg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rmdg {

double NormTerms::L2() const { return std::sqrt(volume); }
double NormTerms::cf() const { return std::sqrt(volume + boundary); }
double NormTerms::up() const { return std::sqrt(volume + boundary + jump + streamline); }
double NormTerms::cf_sharp() const {
  return std::sqrt(volume + boundary + advection + trace_scaled);
}
double NormTerms::up_sharp() const {
  return std::sqrt(volume + boundary + jump + streamline + volume_scaled + trace);
}

double NormTerms::get(ErrorKind kind) const {
  switch (kind) {
    case ErrorKind::L2: return L2();
    case ErrorKind::cf: return cf();
    case ErrorKind::up: return up();
    case ErrorKind::cf_sharp: return cf_sharp();
    case ErrorKind::up_sharp: return up_sharp();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

NormTerms norm_terms(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                     const Eigen::VectorXd& coeffs, const ExactSolution* exact, double eta,
                     int quad_degree) {
  if (coeffs.size() != space.n_dofs()) throw SpaceError("coefficient vector size mismatch");
  const auto& mesh = space.mesh();
  const int dim = mesh.dim();
  const int nl = space.n_local();
  const int qd = quad_degree < 0 ? 2 * space.degree() + 4 : quad_degree;
  const bool with_gradient = exact == nullptr || static_cast<bool>(exact->gradient);
  NormTerms t;

  CellValues cv(space, qd);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    cv.reinit(c);
    const auto dofs = space.cell_dofs(c);
    const double h = mesh.geometry(c).diameter;
    for (int q = 0; q < cv.n_points(); ++q) {
      const Vec& x = cv.point(q);
      double wh = 0.0;
      Vec gh = Vec::Zero(dim);
      for (int i = 0; i < nl; ++i) {
        wh += coeffs[dofs[i]] * cv.value(q, i);
        gh += coeffs[dofs[i]] * cv.gradient(q, i).transpose();
      }
      double e = -wh;
      Vec ge = -gh;
      if (exact) {
        e += exact->value(x);
        if (with_gradient) ge += exact->gradient(x);
      }
      const double w = cv.JxW(q);
      t.volume += w * e * e;
      t.volume_scaled += w * e * e / h;
      if (with_gradient) {
        const double be = problem.velocity(x).dot(ge);
        t.advection += w * be * be;
        t.streamline += w * h * be * be;
      }
    }
  }
  if (!with_gradient) t.advection = t.streamline = std::numeric_limits<double>::quiet_NaN();

  auto side_error = [&](const FaceValues& fv, int cell, int q) {
    const auto dofs = space.cell_dofs(cell);
    double wh = 0.0;
    for (int i = 0; i < nl; ++i) wh += coeffs[dofs[i]] * fv.value(q, i);
    return (exact ? exact->value(fv.point(q)) : 0.0) - wh;
  };

  FaceValues plus(space, qd), minus(space, qd);
  for (const auto& face : mesh.boundary_faces()) {
    plus.reinit(face, face.plus_cell);
    const double h = mesh.geometry(face.plus_cell).diameter;
    for (int q = 0; q < plus.n_points(); ++q) {
      const double e = side_error(plus, face.plus_cell, q);
      const double bn = problem.velocity(plus.point(q)).dot(face.normal);
      const double w = plus.JxW(q);
      t.boundary += 0.5 * w * std::abs(bn) * e * e;
      t.trace += w * e * e;
      t.trace_scaled += w * e * e / h;
    }
  }
  for (const auto& face : mesh.interior_faces()) {
    const int kp = face.plus_cell, km = *face.minus_cell;
    plus.reinit(face, kp);
    minus.reinit(face, km);
    const double hp = mesh.geometry(kp).diameter, hm = mesh.geometry(km).diameter;
    for (int q = 0; q < plus.n_points(); ++q) {
      const double ep = side_error(plus, kp, q);
      const double em = side_error(minus, km, q);
      const double bn = problem.velocity(plus.point(q)).dot(face.normal);
      const double w = plus.JxW(q);
      t.jump += 0.5 * eta * w * std::abs(bn) * (ep - em) * (ep - em);
      t.trace += w * (ep * ep + em * em);
      t.trace_scaled += w * (ep * ep / hp + em * em / hm);
    }
  }
  return t;
}

double error_norm(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                  const Eigen::VectorXd& coeffs, ErrorKind kind, double eta) {
  if (!problem.exact) throw SpaceError("problem has no exact solution");
  const bool needs_gradient = kind == ErrorKind::up || kind == ErrorKind::cf_sharp ||
                              kind == ErrorKind::up_sharp;
  if (needs_gradient && !problem.exact->gradient)
    throw SpaceError("exact solution gradient required for this norm");
  return norm_terms(problem, space, coeffs, &*problem.exact, eta).get(kind);
}

ErrorReport error_report(const AdvectionReactionProblem& problem, const FunctionSpace& space,
                         const Eigen::VectorXd& coeffs, double eta) {
  if (!problem.exact || !problem.exact->gradient)
    throw SpaceError("error report needs an exact solution with gradient");
  const auto t = norm_terms(problem, space, coeffs, &*problem.exact, eta);
  return {t.L2(), t.cf(), t.up(), t.cf_sharp(), t.up_sharp()};
}

SaturationRecord saturation_from_norms(double err_theta, double err_u, double theta_minus_u) {
  constexpr double tiny = 1e-14;
  SaturationRecord r;
  if (err_u >= tiny) r.S = err_theta / err_u;
  if (theta_minus_u >= tiny) r.W = err_theta / theta_minus_u;
  return r;
}

SaturationRecord saturation_ratios(const AdvectionReactionProblem& problem,
                                   const FunctionSpace& trial, const Eigen::VectorXd& u_h,
                                   const FunctionSpace& test, const Eigen::VectorXd& theta_h,
                                   double eta) {
  if (!problem.exact) throw SpaceError("problem has no exact solution");
  const double err_theta = norm_terms(problem, test, theta_h, &*problem.exact, eta).up();
  const double err_u = norm_terms(problem, trial, u_h, &*problem.exact, eta).up();
  const Eigen::VectorXd diff = theta_h - embed_conforming(trial, test, u_h);
  const double gap = norm_terms(problem, test, diff, nullptr, eta).up();
  return saturation_from_norms(err_theta, err_u, gap);
}

Eigen::VectorXd oswald_average(const FunctionSpace& broken, const Eigen::VectorXd& v,
                               const FunctionSpace& conforming) {
  check_same_mesh(broken, conforming);
  if (broken.degree() != conforming.degree()) throw SpaceError("degree mismatch");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(conforming.n_dofs());
  Eigen::VectorXd count = Eigen::VectorXd::Zero(conforming.n_dofs());
  for (int c = 0; c < broken.mesh().n_cells(); ++c) {
    const auto bd = broken.cell_dofs(c);
    const auto cd = conforming.cell_dofs(c);
    for (int i = 0; i < broken.n_local(); ++i) {
      sum[cd[i]] += v[bd[i]];
      count[cd[i]] += 1.0;
    }
  }
  return sum.cwiseQuotient(count);
}

OswaldCheck oswald_ratio(const FunctionSpace& broken, const FunctionSpace& conforming,
                         const Eigen::VectorXd& v) {
  const auto& mesh = broken.mesh();
  const int nl = broken.n_local();
  const int qd = 2 * broken.degree();
  const Eigen::VectorXd diff = v - embed_conforming(conforming, broken, oswald_average(broken, v, conforming));

  std::vector<double> lhs(mesh.n_cells(), 0.0), size(mesh.n_cells(), 0.0);
  CellValues cv(broken, qd);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    cv.reinit(c);
    const auto dofs = broken.cell_dofs(c);
    for (int q = 0; q < cv.n_points(); ++q) {
      double d = 0.0, s = 0.0;
      for (int i = 0; i < nl; ++i) {
        d += diff[dofs[i]] * cv.value(q, i);
        s += v[dofs[i]] * cv.value(q, i);
      }
      lhs[c] += cv.JxW(q) * d * d;
      size[c] += cv.JxW(q) * s * s;
    }
  }

  const auto& faces = mesh.interior_faces();
  std::vector<double> jump(faces.size(), 0.0);
  std::vector<std::vector<int>> vertex_faces(mesh.n_vertices());
  FaceValues plus(broken, qd), minus(broken, qd);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    plus.reinit(face, face.plus_cell);
    minus.reinit(face, *face.minus_cell);
    const auto dp = broken.cell_dofs(face.plus_cell);
    const auto dm = broken.cell_dofs(*face.minus_cell);
    for (int q = 0; q < plus.n_points(); ++q) {
      double j = 0.0;
      for (int i = 0; i < nl; ++i) j += v[dp[i]] * plus.value(q, i) - v[dm[i]] * minus.value(q, i);
      jump[f] += plus.JxW(q) * j * j;
    }
    for (int vtx : mesh.face_vertices(face)) vertex_faces[vtx].push_back(static_cast<int>(f));
  }

  OswaldCheck out;
  std::vector<int> touching;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    touching.clear();
    for (int vtx : mesh.cell_vertices(c))
      touching.insert(touching.end(), vertex_faces[vtx].begin(), vertex_faces[vtx].end());
    std::sort(touching.begin(), touching.end());
    touching.erase(std::unique(touching.begin(), touching.end()), touching.end());
    double rhs = 0.0;
    for (int f : touching) rhs += jump[f];
    rhs *= mesh.geometry(c).diameter;

    out.max_lhs = std::max(out.max_lhs, lhs[c]);
    const double zero = 1e-24 * (size[c] + std::numeric_limits<double>::min());
    if (lhs[c] <= zero) continue;
    if (rhs <= zero) throw Error("averaging defect without face jumps: inconsistent Oswald operator");
    out.max_ratio = std::max(out.max_ratio, lhs[c] / rhs);
  }
  return out;
}

double oswald_inequality_check(std::shared_ptr<const SimplicialMesh> mesh, int degree, int trials,
                               std::uint64_t seed) {
  if (trials < 1) throw Error("at least one trial required");
  const auto broken = build_space(mesh, SpaceKind::broken, degree);
  const auto conforming = build_space(mesh, SpaceKind::conforming, degree);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  Eigen::VectorXd v(broken.n_dofs());
  for (int t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    worst = std::max(worst, oswald_ratio(broken, conforming, v).max_ratio);
  }
  return worst;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / denom;
}

RateSummary convergence_rates(const std::vector<double>& dofs, const std::vector<double>& errors,
                              int window) {
  if (dofs.size() < 2 || dofs.size() != errors.size())
    throw Error("convergence rates need at least two matching points");
  for (double e : errors)
    if (!(e > 0.0)) throw Error("convergence rates need positive errors");
  RateSummary r;
  for (std::size_t i = 0; i + 1 < dofs.size(); ++i)
    r.slopes.push_back(std::log(errors[i + 1] / errors[i]) / std::log(dofs[i + 1] / dofs[i]));
  const std::size_t k = std::min<std::size_t>(std::max(window, 2), dofs.size());
  r.fitted = loglog_slope(std::span(dofs).last(k), std::span(errors).last(k));
  return r;
}

}  // namespace rmdg
