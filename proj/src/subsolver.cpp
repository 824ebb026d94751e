#include "gcho/subsolver.hpp"

#include <cmath>
#include <limits>

namespace gcho {
namespace {

// Sum_i w_i s_i collapsed into one Taylor model (value, gradient, Hessian, weight).
struct Aggregate {
  Vec g;
  Mat H;
  double M = 0.0;
};

Aggregate aggregate(const SurrogateModel& model, const Vec& w) {
  Aggregate a;
  const int n = model.dim();
  a.g = Vec::Zero(n);
  a.H = Mat::Zero(n, n);
  for (int i = 0; i < model.size(); ++i) {
    if (w(i) == 0.0) continue;
    const auto& c = model.components()[static_cast<std::size_t>(i)];
    a.g += w(i) * c.grad;
    if (c.hess) a.H += w(i) * *c.hess;
    a.M += w(i) * model.reg_weights()(i);
  }
  return a;
}

double model_objective(const SurrogateModel& model, const OuterFunction& outer, const SimpleTerm& h,
                       const Vec& x) {
  return outer.eval(model.values(x)) + h.eval(x);
}

Vec first_nonzero_positive(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

bool first_nonzero_is_positive(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) return v(i) > 0;
  }
  return true;
}

SubproblemResult solve_weighted_p1(const SurrogateModel& model, const OuterFunction& outer, const Vec& w,
                                   const SimpleTerm& h) {
  const Aggregate a = aggregate(model, w);
  SubproblemResult out;
  out.x_next = h.project(model.center() - a.g / a.M);
  out.model_value = model_objective(model, outer, h, out.x_next);
  out.stationarity_residual = h.kind() == SimpleTerm::Kind::Zero ? (a.g + a.M * (out.x_next - model.center())).norm()
                                                                 : 0.0;
  out.converged = true;
  out.global = true;
  return out;
}

SubproblemResult solve_weighted_p2(const SurrogateModel& model, const OuterFunction& outer, const Vec& w,
                                   double tol) {
  const Aggregate a = aggregate(model, w);
  const CubicStep step = cubic_step(a.H, a.g, a.M);
  SubproblemResult out;
  out.x_next = model.center() + step.d;
  out.model_value = model_objective(model, outer, SimpleTerm::zero(), out.x_next);
  out.stationarity_residual = (a.g + a.H * step.d + 0.5 * a.M * step.d.norm() * step.d).norm();
  out.inner_iterations = step.root_iterations;
  out.converged = out.stationarity_residual <= tol * std::max(1.0, a.g.norm());
  out.global = true;
  return out;
}

// A single outer piece u makes g(s) = <u, s>, a smooth weighted sum.
std::optional<Vec> single_piece(const OuterFunction& outer) {
  if (outer.pieces().size() == 1) return outer.pieces().front();
  return std::nullopt;
}

}  // namespace

double cubic_model(const Mat& H, const Vec& g, double M, const Vec& d) {
  return g.dot(d) + 0.5 * d.dot(H * d) + M / 6.0 * std::pow(d.norm(), 3);
}

CubicStep cubic_step(const Mat& H, const Vec& g, double M) {
  if (!(M > 0)) throw Error(ErrorCode::InvalidArgument, "cubic_step: M must be positive");
  const Eigen::Index n = g.size();
  const auto ed = eigh(H);
  const Vec& lam = ed.eigenvalues;
  const Vec gh = ed.eigenvectors.transpose() * g;
  const double lmin = lam(0);
  const double lscale = 1.0 + lam.cwiseAbs().maxCoeff();
  const double gnorm = g.norm();
  const double r_low = std::max(0.0, -2.0 * lmin / M);

  CubicStep out;
  if (gnorm == 0.0 && lmin >= 0.0) {
    out.d = Vec::Zero(n);
    return out;
  }

  // Components in the bottom eigenspace with negligible gradient weight are
  // excluded from the secular function; they carry the hard-case direction.
  std::vector<bool> skip(static_cast<std::size_t>(n), false);
  double bottom_weight = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lam(i) <= lmin + 1e-10 * lscale) bottom_weight += gh(i) * gh(i);
  }
  const bool bottom_orthogonal = std::sqrt(bottom_weight) <= 1e-12 * (1.0 + gnorm);
  if (lmin < 0 && bottom_orthogonal) {
    for (Eigen::Index i = 0; i < n; ++i) skip[static_cast<std::size_t>(i)] = lam(i) <= lmin + 1e-10 * lscale;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (gh(i) == 0.0) skip[static_cast<std::size_t>(i)] = true;
  }

  auto coeffs = [&](double r) {
    Vec c = Vec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!skip[static_cast<std::size_t>(i)]) c(i) = -gh(i) / (lam(i) + 0.5 * M * r);
    }
    return c;
  };

  double last_r = -std::numeric_limits<double>::infinity();
  double last_phi = -std::numeric_limits<double>::infinity();
  auto phi = [&](double r) {
    ++out.root_iterations;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (skip[static_cast<std::size_t>(i)]) continue;
      const double den = lam(i) + 0.5 * M * r;
      if (den <= 0.0) return -std::numeric_limits<double>::infinity();
      s += gh(i) * gh(i) / (den * den);
    }
    const double v = r - std::sqrt(s);
    if (r > last_r && v < last_phi - 1e-12 * (1.0 + std::abs(last_phi))) out.monotone = false;
    if (r > last_r) {
      last_r = r;
      last_phi = v;
    }
    return v;
  };

  const double phi_low = phi(r_low);
  Vec c;
  if (phi_low >= 0.0) {
    // Hard case: the secular solution sits at the boundary of the admissible interval.
    c = coeffs(r_low);
    const double tau = std::sqrt(std::max(0.0, r_low * r_low - c.squaredNorm()));
    const Vec dp = ed.eigenvectors * c;
    Vec d = dp;
    if (tau > 0.0) {
      const Vec v = first_nonzero_positive(ed.eigenvectors.col(0));
      const Vec plus = dp + tau * v;
      const Vec minus = dp - tau * v;
      d = first_nonzero_is_positive(plus) ? plus : minus;
      out.hard_case = true;
    }
    out.d = d;
    out.radius = d.norm();
  } else {
    const double r_hi = r_low + std::max(1.0, 2.0 * gnorm / M);
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + r_hi);
    double r;
    try {
      r = solve_scalar_increasing(phi, r_low, r_hi, tol);
    } catch (const Error& e) {
      throw Error(ErrorCode::NoConvergence, std::string("cubic_step: ") + e.what());
    }
    c = coeffs(r);
    out.d = ed.eigenvectors * c;
    out.radius = r;
  }
  if (!out.d.allFinite()) throw Error(ErrorCode::NoConvergence, "cubic_step: non-finite step");
  out.model_value = cubic_model(H, g, M, out.d);
  return out;
}

SubproblemResult solve_identity_p1(const SurrogateModel& model, const SimpleTerm& h) {
  if (model.order() != 1) throw Error(ErrorCode::InvalidArgument, "solve_identity_p1: order-1 model required");
  return solve_weighted_p1(model, OuterFunction::identity(model.size()), Vec::Ones(model.size()), h);
}

SubproblemResult solve_identity_p2_cubic(const SurrogateModel& model, const SimpleTerm& h, double tol) {
  if (model.order() != 2) throw Error(ErrorCode::InvalidArgument, "solve_identity_p2_cubic: order-2 model required");
  const OuterFunction outer = OuterFunction::identity(model.size());
  if (h.kind() != SimpleTerm::Kind::Zero) {
    return solve_coordmax_smoothed(model, outer, h, SubsolverOptions{}.theta, SmoothingSchedule{});
  }
  return solve_weighted_p2(model, outer, Vec::Ones(model.size()), tol);
}

SubproblemResult solve_coordmax_smoothed(const SurrogateModel& model, const OuterFunction& outer,
                                         const SimpleTerm& h, double theta, const SmoothingSchedule& schedule,
                                         double abs_floor) {
  const int n = model.dim();
  const int p = model.order();
  if (auto u = single_piece(outer); u && model.kind() == SurrogateModel::Kind::TaylorReg) {
    if (p == 1) return solve_weighted_p1(model, outer, *u, h);
    if (h.kind() == SimpleTerm::Kind::Zero) return solve_weighted_p2(model, outer, *u, 1e-9);
  }

  const auto& us = outer.pieces();
  PieceSet pieces;
  pieces.dim = n;
  pieces.count = static_cast<int>(us.size());
  pieces.values = [&](const Vec& x) {
    const Vec s = model.values(x);
    Vec v(static_cast<Eigen::Index>(us.size()));
    for (std::size_t j = 0; j < us.size(); ++j) v(static_cast<Eigen::Index>(j)) = us[j].dot(s);
    return v;
  };
  pieces.derivatives = [&](const Vec& x, int j, Vec& g, Mat& H) {
    const Vec& u = us[static_cast<std::size_t>(j)];
    g = Vec::Zero(n);
    H = Mat::Zero(n, n);
    for (int i = 0; i < model.size(); ++i) {
      if (u(i) == 0.0) continue;
      g += u(i) * model.grad(i, x);
      H += u(i) * model.hess(i, x);
    }
  };

  const PiecewiseMaxResult r = minimize_piecewise_max(pieces, model.center(), h, schedule);
  SubproblemResult out;
  out.x_next = r.x;
  out.model_value = outer.eval(model.values(r.x)) + h.eval(r.x);
  out.stationarity_residual = r.stationarity;
  out.inner_iterations = r.iterations;
  out.box_heuristic = r.box_heuristic;
  const double target = theta * std::pow((r.x - model.center()).norm(), p) + abs_floor;
  out.converged = r.stationarity <= target && r.majorization_chain_failures == 0;

  // Order-1 pieces are convex quadratics; order-2 pieces are convex when every
  // aggregated Taylor Hessian is positive semidefinite. A stationary point of a
  // max of convex pieces is then a global minimizer.
  bool convex = model.kind() == SurrogateModel::Kind::TaylorReg;
  if (convex && p == 2) {
    for (const auto& u : us) {
      Mat Hu = Mat::Zero(n, n);
      for (int i = 0; i < model.size(); ++i) {
        if (u(i) != 0.0) Hu += u(i) * *model.components()[static_cast<std::size_t>(i)].hess;
      }
      if (eigh(Hu).eigenvalues(0) < -1e-12 * (1.0 + Hu.norm())) {
        convex = false;
        break;
      }
    }
  }
  out.global = convex && out.converged;
  return out;
}

bool verify_descent(const SubproblemResult& result, double f_prev) {
  return result.model_value <= f_prev + 1e-12 * (1.0 + std::abs(f_prev));
}

SubproblemResult solve_subproblem(const SurrogateModel& model, const OuterFunction& outer, const SimpleTerm& h,
                                  const SubsolverOptions& options) {
  if (auto u = single_piece(outer);
      u && model.kind() == SurrogateModel::Kind::TaylorReg && model.order() == 2 && h.kind() == SimpleTerm::Kind::Zero) {
    return solve_weighted_p2(model, outer, *u, options.cubic_tol);
  }
  return solve_coordmax_smoothed(model, outer, h, options.theta, options.schedule, options.abs_floor);
}

}  // namespace gcho
