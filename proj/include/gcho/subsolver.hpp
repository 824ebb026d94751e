#pragma once

#include "gcho/piecewise_max.hpp"
#include "gcho/surrogate.hpp"

namespace gcho {

struct SubproblemResult {
  Vec x_next;
  double model_value = 0.0;           // g(s(x_next; x_k)) + h(x_next)
  double stationarity_residual = 0.0;
  int inner_iterations = 0;
  bool converged = false;
  bool global = false;                // solver guarantees a global minimizer of the model
  bool box_heuristic = false;
};

/// Global minimizer of  <g,d> + 1/2 d'Hd + M/6 ||d||^3.
struct CubicStep {
  Vec d;
  double model_value = 0.0;
  double radius = 0.0;
  bool hard_case = false;
  bool monotone = true;  // secular function never decreased between evaluations
  int root_iterations = 0;
};

double cubic_model(const Mat& H, const Vec& g, double M, const Vec& d);

/// Throws NoConvergence when the secular root cannot be bracketed.
CubicStep cubic_step(const Mat& H, const Vec& g, double M);

struct SubsolverOptions {
  double theta = 0.5;
  double abs_floor = 1e-10;
  double cubic_tol = 1e-9;  // relative to max(1, ||g||)
  SmoothingSchedule schedule;
};

/// Order-1 model under a single nonnegative aggregation: x - g/M, then box projection.
SubproblemResult solve_identity_p1(const SurrogateModel& model, const SimpleTerm& h);

/// Order-2 model summed over its components; cubic step with h = 0.
SubproblemResult solve_identity_p2_cubic(const SurrogateModel& model, const SimpleTerm& h, double tol);

/// Minimizes max_j <u_j, s(x)> + h(x) over the outer pieces u_j.
SubproblemResult solve_coordmax_smoothed(const SurrogateModel& model, const OuterFunction& outer,
                                         const SimpleTerm& h, double theta, const SmoothingSchedule& schedule,
                                         double abs_floor = 1e-10);

/// model_value <= f_prev + 1e-12 (1 + |f_prev|).
bool verify_descent(const SubproblemResult& result, double f_prev);

/// Routes to the closed form, the cubic solver or the piecewise-max solver.
SubproblemResult solve_subproblem(const SurrogateModel& model, const OuterFunction& outer, const SimpleTerm& h,
                                  const SubsolverOptions& options);

}  // namespace gcho
