#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcho/subsolver.hpp"

namespace gcho {

enum class RunStatus { StepTol, MaxIter, SubsolverFailure };

std::string to_string(RunStatus s);

/// One outer step: the surrogate built at x_k and the accepted move to x_{k+1}.
struct IterateRecord {
  int k = 0;
  Vec x;                    // x_k
  double f = 0.0;           // f(x_k)
  double step_norm = 0.0;   // ||x_{k+1} - x_k||
  Vec M;                    // accepted regularization weights
  int ls_trials = 0;        // subproblem solves until descent held
  int inner_iters = 0;
  double stat_res = 0.0;
  double wall_ms = 0.0;
  Vec majorization_gap;     // s_i(x_{k+1}; x_k) - F_i(x_{k+1})
  double model_value = 0.0;
  bool converged = false;
  bool global = false;
  bool fd_hessian = false;
  bool box_heuristic = false;
};

struct IterateTrace {
  std::string problem;
  int p = 1;
  std::vector<IterateRecord> records;
  Vec x_final;
  double f_final = 0.0;
  RunStatus status = RunStatus::MaxIter;
  std::string message;
  bool all_global = true;   // every accepted subproblem solved to global optimality

  int iterations() const { return static_cast<int>(records.size()); }
  /// x_{k+1} and f(x_{k+1}) for record k.
  const Vec& x_next(int k) const;
  double f_next(int k) const;
};

struct SolverConfig {
  int p = 2;
  Vec M0;                      // empty: m0 for every component
  double m0 = 1.0;
  double M_growth = 2.0;
  double M_shrink = 0.5;
  double M_min = 1e-8;
  int max_doublings = 60;
  double tol_step = 1e-4;
  int max_iter = 500;
  double theta = 0.5;
  int certificate_every = 0;   // 0 = off
  double mu_factor = 1.5;
  std::optional<double> mu_override;
  std::uint64_t seed = 0;
  SubsolverOptions subsolver;

  void validate(int m) const;
};

IterateTrace run(const ProblemSpec& spec, const SolverConfig& config);

/// (f(x_k) - f(x_{k+1})) (p+1)! / ||x_{k+1} - x_k||^{p+1}; +inf for a zero step.
double descent_margin(const IterateTrace& trace, int k);

}  // namespace gcho
