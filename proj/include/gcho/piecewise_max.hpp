#pragma once

#include <functional>

#include "gcho/problem.hpp"

namespace gcho {

/// A finite family of smooth pieces phi_j; the objective is max_j phi_j(x) + h(x).
struct PieceSet {
  int dim = 0;
  int count = 0;
  std::function<Vec(const Vec&)> values;
  /// Gradient and Hessian of piece j.
  std::function<void(const Vec&, int, Vec&, Mat&)> derivatives;
};

/// Temperature schedule mu_t = mu0 * decay^{-t}, t = 0..stages-1.
struct SmoothingSchedule {
  double mu0 = 0.0;  // <= 0: spread of the piece values at the start / 10
  double decay = 4.0;
  int stages = 8;
  int iters_per_stage = 200;
  double armijo_c = 1e-4;
  bool polish = true;  // active-set Newton on the KKT system after the last stage
};

struct PiecewiseMaxResult {
  Vec x;
  double value = 0.0;                // max_j phi_j(x)
  double stationarity = 0.0;         // min-norm element of the hull of near-active gradients
  int iterations = 0;
  int stages_run = 0;
  bool polished = false;
  int majorization_chain_failures = 0;  // max <= smoothed <= max + mu log m violated
  bool box_heuristic = false;
};

/// mu log sum_j exp(v_j / mu), evaluated stably.
double log_sum_exp(const Vec& v, double mu);

/// Minimizes max_j phi_j(x) over h's domain by log-sum-exp continuation with
/// a Newton-type inner method, then (unconstrained only) an active-set Newton
/// polish on the KKT system of the nonsmooth problem.
PiecewiseMaxResult minimize_piecewise_max(const PieceSet& pieces, const Vec& start, const SimpleTerm& h,
                                          const SmoothingSchedule& schedule);

/// min-norm element of conv{grad phi_j : phi_j(x) >= max - act_tol}.
double piecewise_stationarity(const PieceSet& pieces, const Vec& x, double act_tol);

}  // namespace gcho
