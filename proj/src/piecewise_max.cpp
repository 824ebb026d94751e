#include "gcho/piecewise_max.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gcho {
namespace {

struct Smoothed {
  double value = 0.0;
  double max_value = 0.0;
  Vec grad;
  Mat hess;
};

// Pieces whose softmax weight falls below this are dropped from derivatives.
constexpr double kWeightFloor = 1e-18;

Smoothed smoothed_eval(const PieceSet& pieces, const Vec& x, double mu, bool with_derivatives) {
  const Vec vals = pieces.values(x);
  Smoothed s;
  s.max_value = vals.maxCoeff();
  Vec w = ((vals.array() - s.max_value) / mu).exp().matrix();
  const double total = w.sum();
  s.value = s.max_value + mu * std::log(total);
  if (!with_derivatives) return s;
  w /= total;

  const int n = pieces.dim;
  s.grad = Vec::Zero(n);
  s.hess = Mat::Zero(n, n);
  Mat outer = Mat::Zero(n, n);
  Vec g(n);
  Mat h(n, n);
  for (int j = 0; j < pieces.count; ++j) {
    if (w(j) < kWeightFloor) continue;
    pieces.derivatives(x, j, g, h);
    s.grad += w(j) * g;
    s.hess += w(j) * h;
    outer += w(j) * g * g.transpose();
  }
  s.hess += (outer - s.grad * s.grad.transpose()) / mu;
  s.hess = 0.5 * (s.hess + s.hess.transpose()).eval();
  return s;
}

double smoothed_value(const PieceSet& pieces, const Vec& x, double mu) {
  return log_sum_exp(pieces.values(x), mu);
}

// Newton direction on a possibly indefinite Hessian: shift until Cholesky succeeds.
Vec regularized_newton(const Mat& hess, const Vec& grad) {
  const Eigen::Index n = grad.size();
  const double scale = std::max(1e-12, hess.cwiseAbs().maxCoeff());
  double tau = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::LLT<Mat> llt(hess + tau * Mat::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      Vec d = -llt.solve(grad);
      if (d.allFinite() && d.dot(grad) < 0) return d;
    }
    tau = tau == 0.0 ? 1e-10 * scale : tau * 10.0;
  }
  return -grad;
}

struct StageStats {
  int iterations = 0;
  int chain_failures = 0;
};

StageStats run_stage_unconstrained(const PieceSet& pieces, Vec& x, double mu, const SmoothingSchedule& sch) {
  StageStats st;
  const double logm = std::log(static_cast<double>(pieces.count));
  for (int it = 0; it < sch.iters_per_stage; ++it) {
    ++st.iterations;
    const Smoothed s = smoothed_eval(pieces, x, mu, true);
    const double gnorm = s.grad.norm();
    const double gtol = 1e-13 * (1.0 + std::abs(s.value));
    Vec d;
    bool curvature_step = false;
    if (gnorm <= gtol) {
      const auto ed = eigh(s.hess);
      const double lmin = ed.eigenvalues(0);
      if (lmin >= -1e-8 * (1.0 + ed.eigenvalues.cwiseAbs().maxCoeff())) break;
      d = ed.eigenvectors.col(0);
      if (d.dot(s.grad) > 0) d = -d;
      curvature_step = true;
    } else {
      d = regularized_newton(s.hess, s.grad);
    }

    double alpha = 1.0;
    const double slope = s.grad.dot(d);
    bool accepted = false;
    Vec trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = x + alpha * d;
      const double v = smoothed_value(pieces, trial, mu);
      const double target = curvature_step ? s.value - 1e-16 * (1.0 + std::abs(s.value))
                                           : s.value + sch.armijo_c * alpha * slope;
      if (std::isfinite(v) && v <= target) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const double step = (trial - x).norm();
    x = trial;

    const Vec vals = pieces.values(x);
    const double vmax = vals.maxCoeff();
    const double lse = log_sum_exp(vals, mu);
    const double slack = 1e-12 * (1.0 + std::abs(vmax));
    if (lse < vmax - slack || lse > vmax + mu * logm + slack) ++st.chain_failures;

    if (step <= 1e-15 * (1.0 + x.norm())) break;
  }
  return st;
}

StageStats run_stage_box(const PieceSet& pieces, Vec& x, double mu, const SimpleTerm& h,
                         const SmoothingSchedule& sch) {
  StageStats st;
  const double logm = std::log(static_cast<double>(pieces.count));
  double step_len = 1.0;
  for (int it = 0; it < sch.iters_per_stage; ++it) {
    ++st.iterations;
    const Smoothed s = smoothed_eval(pieces, x, mu, true);
    const double lip = std::max(1e-12, s.hess.norm());
    step_len = std::max(step_len, 1.0 / lip);
    double alpha = step_len;
    bool accepted = false;
    Vec trial;
    for (int ls = 0; ls < 60; ++ls) {
      trial = h.project(x - alpha * s.grad);
      const double v = smoothed_value(pieces, trial, mu);
      if (std::isfinite(v) && v <= s.value + sch.armijo_c * s.grad.dot(trial - x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    step_len = alpha * 2.0;
    const double step = (trial - x).norm();
    x = trial;

    const Vec vals = pieces.values(x);
    const double vmax = vals.maxCoeff();
    const double lse = log_sum_exp(vals, mu);
    const double slack = 1e-12 * (1.0 + std::abs(vmax));
    if (lse < vmax - slack || lse > vmax + mu * logm + slack) ++st.chain_failures;
    if (step <= 1e-15 * (1.0 + x.norm())) break;
  }
  return st;
}

// Newton on  sum_j l_j grad phi_j = 0,  phi_j = t (j in A),  sum_j l_j = 1.
struct PolishOutcome {
  Vec x;
  Vec lambda;
  bool converged = false;
  int iterations = 0;
};

PolishOutcome kkt_newton(const PieceSet& pieces, const Vec& x0, const std::vector<int>& active,
                         const Vec& lambda0) {
  const int n = pieces.dim;
  const int k = static_cast<int>(active.size());
  const int dim = n + k + 1;
  PolishOutcome out;
  Vec x = x0;
  Vec lam = lambda0;
  double t;
  {
    const Vec vals = pieces.values(x);
    t = vals(active[0]);
    for (int a = 1; a < k; ++a) t = std::max(t, vals(active[static_cast<std::size_t>(a)]));
  }

  auto residual = [&](const Vec& xx, const Vec& ll, double tt, Vec* res, Mat* jac) {
    const Vec vals = pieces.values(xx);
    Vec r = Vec::Zero(dim);
    Mat jcb = Mat::Zero(dim, dim);
    Vec g(n);
    Mat h(n, n);
    for (int a = 0; a < k; ++a) {
      const int j = active[static_cast<std::size_t>(a)];
      pieces.derivatives(xx, j, g, h);
      r.head(n) += ll(a) * g;
      r(n + a) = vals(j) - tt;
      if (jac) {
        jcb.topLeftCorner(n, n) += ll(a) * h;
        jcb.block(0, n + a, n, 1) = g;
        jcb.block(n + a, 0, 1, n) = g.transpose();
        jcb(n + a, n + k) = -1.0;
        jcb(n + k, n + a) = 1.0;
      }
    }
    r(n + k) = ll.sum() - 1.0;
    if (res) *res = r;
    if (jac) *jac = jcb;
  };

  Vec res;
  Mat jac;
  residual(x, lam, t, &res, &jac);
  double rnorm = res.norm();
  for (int it = 0; it < 50; ++it) {
    out.iterations = it + 1;
    const double scale = 1.0 + std::abs(t) + jac.topRightCorner(n, k).cwiseAbs().maxCoeff();
    if (rnorm <= 1e-14 * scale) {
      out.converged = true;
      break;
    }
    const Vec delta = -jac.fullPivLu().solve(res);
    if (!delta.allFinite()) break;
    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Vec xn = x + alpha * delta.head(n);
      const Vec ln = lam + alpha * delta.segment(n, k);
      const double tn = t + alpha * delta(n + k);
      Vec rn;
      residual(xn, ln, tn, &rn, nullptr);
      if (rn.norm() < rnorm * (1.0 - 1e-4 * alpha) || (alpha == 1.0 && rn.norm() <= 1e-14 * scale)) {
        x = xn;
        lam = ln;
        t = tn;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) {
      out.converged = rnorm <= 1e-10 * scale;
      break;
    }
    residual(x, lam, t, &res, &jac);
    rnorm = res.norm();
  }
  if (!out.converged) {
    const double scale = 1.0 + std::abs(t) + jac.topRightCorner(n, k).cwiseAbs().maxCoeff();
    out.converged = rnorm <= 1e-10 * scale;
  }
  out.x = x;
  out.lambda = lam;
  return out;
}

}  // namespace

double log_sum_exp(const Vec& v, double mu) {
  const double vmax = v.maxCoeff();
  return vmax + mu * std::log(((v.array() - vmax) / mu).exp().sum());
}

double piecewise_stationarity(const PieceSet& pieces, const Vec& x, double act_tol) {
  const Vec vals = pieces.values(x);
  const double vmax = vals.maxCoeff();
  std::vector<Vec> grads;
  Vec g(pieces.dim);
  Mat h(pieces.dim, pieces.dim);
  for (int j = 0; j < pieces.count; ++j) {
    if (vals(j) >= vmax - act_tol) {
      pieces.derivatives(x, j, g, h);
      grads.push_back(g);
    }
  }
  return min_norm_in_hull(grads, 1e-15).point.norm();
}

PiecewiseMaxResult minimize_piecewise_max(const PieceSet& pieces, const Vec& start, const SimpleTerm& h,
                                          const SmoothingSchedule& schedule) {
  if (pieces.count < 1) throw Error(ErrorCode::InvalidArgument, "piecewise max needs at least one piece");
  PiecewiseMaxResult out;
  const bool boxed = h.kind() == SimpleTerm::Kind::BoxIndicator;
  out.box_heuristic = boxed;
  Vec x = h.project(start);

  const Vec v0 = pieces.values(x);
  const double vmax0 = v0.maxCoeff();
  const double spread = vmax0 - v0.minCoeff();
  double mu = schedule.mu0;
  if (mu <= 0.0) {
    mu = spread > 1e-12 * (1.0 + std::abs(vmax0)) ? spread / 10.0 : 1e-3 * (1.0 + std::abs(vmax0));
  }
  const int stages = pieces.count == 1 ? 1 : std::max(1, schedule.stages);
  double mu_last = mu;
  for (int t = 0; t < stages; ++t) {
    mu_last = mu;
    const StageStats st = boxed ? run_stage_box(pieces, x, mu, h, schedule)
                                : run_stage_unconstrained(pieces, x, mu, schedule);
    out.iterations += st.iterations;
    out.majorization_chain_failures += st.chain_failures;
    ++out.stages_run;
    mu /= schedule.decay;
  }

  Vec vals = pieces.values(x);
  double vmax = vals.maxCoeff();
  const double base_tol = 1e-9 * (1.0 + std::abs(vmax));
  double act_tol = std::max(base_tol, 10.0 * mu_last);
  if (pieces.count == 1) act_tol = base_tol;
  double stat = piecewise_stationarity(pieces, x, act_tol);

  if (schedule.polish && !boxed && pieces.count > 1) {
    const double logm = std::log(static_cast<double>(pieces.count));
    std::vector<int> active;
    for (int j = 0; j < pieces.count; ++j) {
      if (vals(j) >= vmax - std::max(base_tol, 50.0 * mu_last * std::max(1.0, logm))) active.push_back(j);
    }
    Vec w = ((vals.array() - vmax) / mu_last).exp().matrix();
    while (!active.empty()) {
      Vec lam0(static_cast<Eigen::Index>(active.size()));
      for (std::size_t a = 0; a < active.size(); ++a) lam0(static_cast<Eigen::Index>(a)) = w(active[a]);
      if (lam0.sum() <= 0) lam0.setOnes();
      lam0 /= lam0.sum();
      const PolishOutcome pol = kkt_newton(pieces, x, active, lam0);
      out.iterations += pol.iterations;
      Eigen::Index worst;
      const double lam_min = pol.lambda.minCoeff(&worst);
      if (pol.converged && lam_min >= -1e-10) {
        const Vec pv = pieces.values(pol.x);
        const double pmax = pv.maxCoeff();
        const double pstat = piecewise_stationarity(pieces, pol.x, base_tol);
        double grad_scale = 0.0;
        {
          Vec g(pieces.dim);
          Mat hh(pieces.dim, pieces.dim);
          for (int j : active) {
            pieces.derivatives(pol.x, j, g, hh);
            grad_scale = std::max(grad_scale, g.norm());
          }
        }
        if (pol.x.allFinite() && pmax <= vmax + 1e-12 * (1.0 + std::abs(vmax)) &&
            pstat <= stat + 1e-12 * (1.0 + grad_scale)) {
          x = pol.x;
          vals = pv;
          vmax = pmax;
          stat = pstat;
          out.polished = true;
        }
        break;
      }
      if (!pol.converged || active.size() == 1) break;
      active.erase(active.begin() + worst);
    }
  }

  out.x = x;
  out.value = vmax;
  out.stationarity = stat;
  return out;
}

}  // namespace gcho
