#include "gcho/driver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "gcho/log.hpp"

namespace gcho {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::StepTol: return "StepTol";
    case RunStatus::MaxIter: return "MaxIter";
    case RunStatus::SubsolverFailure: return "SubsolverFailure";
  }
  return "?";
}

const Vec& IterateTrace::x_next(int k) const {
  return k + 1 < iterations() ? records[static_cast<std::size_t>(k + 1)].x : x_final;
}

double IterateTrace::f_next(int k) const {
  return k + 1 < iterations() ? records[static_cast<std::size_t>(k + 1)].f : f_final;
}

void SolverConfig::validate(int m) const {
  auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (p != 1 && p != 2) bad("p must be 1 or 2");
  if (M0.size() != 0 && (M0.size() != m || (M0.array() <= 0).any())) bad("M0 must hold m positive entries");
  if (M0.size() == 0 && !(m0 > 0)) bad("m0 must be positive");
  if (!(M_growth > 1)) bad("M_growth must exceed 1");
  if (!(M_shrink > 0 && M_shrink <= 1)) bad("M_shrink must lie in (0, 1]");
  if (!(M_min > 0)) bad("M_min must be positive");
  if (!(tol_step >= 0)) bad("tol_step must be nonnegative");
  if (max_iter < 1) bad("max_iter must be positive");
  if (max_doublings < 0) bad("max_doublings must be nonnegative");
  if (!(theta >= 0)) bad("theta must be nonnegative");
  if (certificate_every < 0) bad("certificate_every must be nonnegative");
  if (!(mu_factor > 1)) bad("mu_factor must exceed 1");
  if (mu_override && !(*mu_override > 0)) bad("mu_override must be positive");
}

IterateTrace run(const ProblemSpec& spec, const SolverConfig& config) {
  spec.validate();
  config.validate(spec.m);
  if (config.p > spec.smoothness_order()) {
    throw Error(ErrorCode::InvalidArgument, "problem oracles do not support the requested order");
  }
  using clock = std::chrono::steady_clock;

  IterateTrace trace;
  trace.problem = spec.name;
  trace.p = config.p;
  Vec x = spec.x0;
  double f = evaluate(spec, x).f;
  if (!std::isfinite(f)) throw Error(ErrorCode::InvalidArgument, "x0 lies outside dom f");
  Vec M = config.M0.size() ? config.M0 : Vec::Constant(spec.m, config.m0);
  trace.status = RunStatus::MaxIter;

  for (int k = 0; k < config.max_iter; ++k) {
    const auto t0 = clock::now();
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.f = f;
    bool accepted = false;
    SubproblemResult res;
    CompositeValue next;
    SurrogateModel model;
    for (int trial = 0; trial <= config.max_doublings; ++trial) {
      ++rec.ls_trials;
      try {
        model = build_taylor(spec, x, config.p, M);
        res = solve_subproblem(model, spec.outer, spec.simple, config.subsolver);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::OracleError) {
          throw Error(ErrorCode::OracleError, spec.name + " at iteration " + std::to_string(k) + ": " + e.what());
        }
        if (e.code() != ErrorCode::NoConvergence) throw;
        log::debug(spec.name, " k=", k, " subsolver: ", e.what());
        M *= config.M_growth;
        continue;
      }
      rec.inner_iters += res.inner_iterations;
      next = evaluate(spec, res.x_next);
      if (verify_descent(res, f) && next.f <= f + 1e-13 * (1.0 + std::abs(f))) {
        accepted = true;
        break;
      }
      M *= config.M_growth;
    }
    if (!accepted) {
      trace.status = RunStatus::SubsolverFailure;
      trace.message = "descent not reached after " + std::to_string(config.max_doublings) + " doublings of M";
      log::info(spec.name, ": ", trace.message, " at iteration ", k);
      break;
    }
    rec.step_norm = (res.x_next - x).norm();
    rec.M = M;
    rec.stat_res = res.stationarity_residual;
    rec.model_value = res.model_value;
    rec.converged = res.converged;
    rec.global = res.global;
    rec.fd_hessian = model.used_fd_hessian();
    rec.box_heuristic = res.box_heuristic;
    rec.majorization_gap = model.values(res.x_next) - next.F_values;
    rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    trace.all_global = trace.all_global && res.global;
    log::debug(spec.name, " k=", k, " f=", f, " step=", rec.step_norm, " Mmax=", M.maxCoeff(),
               " trials=", rec.ls_trials);

    const double step = rec.step_norm;
    trace.records.push_back(std::move(rec));
    x = res.x_next;
    f = next.f;
    M = (M * config.M_shrink).cwiseMax(config.M_min);
    if (step <= config.tol_step) {
      trace.status = RunStatus::StepTol;
      break;
    }
  }
  trace.x_final = x;
  trace.f_final = f;
  log::info(spec.name, ": ", to_string(trace.status), " after ", trace.iterations(), " iterations, f=", f);
  return trace;
}

double descent_margin(const IterateTrace& trace, int k) {
  if (k < 0 || k >= trace.iterations()) throw Error(ErrorCode::InvalidArgument, "descent_margin: k out of range");
  const auto& rec = trace.records[static_cast<std::size_t>(k)];
  if (rec.step_norm == 0.0) return std::numeric_limits<double>::infinity();
  return (rec.f - trace.f_next(k)) * factorial(trace.p + 1) / std::pow(rec.step_norm, trace.p + 1);
}

}  // namespace gcho
