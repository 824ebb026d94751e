#include "gcho/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gcho/log.hpp"

namespace gcho {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

PieceSet prox_pieces(const ProblemSpec& spec, const Vec& x_k, double mu, int p) {
  const auto& us = spec.outer.pieces();
  const int n = spec.n;
  PieceSet ps;
  ps.dim = n;
  ps.count = static_cast<int>(us.size());
  ps.values = [&spec, &us, x_k, mu, p](const Vec& y) {
    Vec F(spec.m);
    for (int i = 0; i < spec.m; ++i) F(i) = spec.inner[static_cast<std::size_t>(i)].eval(y);
    const double reg = power_term(mu, p, y - x_k);
    Vec v(static_cast<Eigen::Index>(us.size()));
    for (std::size_t j = 0; j < us.size(); ++j) v(static_cast<Eigen::Index>(j)) = us[j].dot(F) + reg;
    return v;
  };
  ps.derivatives = [&spec, &us, x_k, mu, p](const Vec& y, int j, Vec& g, Mat& H) {
    const Vec& u = us[static_cast<std::size_t>(j)];
    g = power_term_grad(mu, p, y - x_k);
    H = power_term_hess(mu, p, y - x_k);
    for (int i = 0; i < spec.m; ++i) {
      if (u(i) == 0.0) continue;
      const auto& oracle = spec.inner[static_cast<std::size_t>(i)];
      g += u(i) * oracle.grad(y);
      H += u(i) * hessian_of(oracle, y);
    }
  };
  return ps;
}

double prox_objective(const ProblemSpec& spec, const Vec& y, const Vec& x_k, double mu, int p) {
  return evaluate(spec, y).f + power_term(mu, p, y - x_k);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

LineFit least_squares_line(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  Mat A(static_cast<Eigen::Index>(n), 2);
  Vec b(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    A(static_cast<Eigen::Index>(i), 0) = t[i];
    A(static_cast<Eigen::Index>(i), 1) = 1.0;
    b(static_cast<Eigen::Index>(i)) = v[i];
  }
  const Vec c = A.colPivHouseholderQr().solve(b);
  LineFit out;
  out.slope = c(0);
  out.intercept = c(1);
  out.residual = (A * c - b).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace

CertificateRecord proximal_certificate(const ProblemSpec& spec, const Vec& x_k, const Vec& x_next, double mu, int p,
                                       std::uint64_t seed) {
  if (!(mu > 0)) throw Error(ErrorCode::InvalidArgument, "proximal_certificate: mu must be positive");
  if (p != 1 && p != 2) throw Error(ErrorCode::InvalidArgument, "proximal_certificate: p must be 1 or 2");
  const double step = (x_next - x_k).norm();

  std::vector<Vec> starts = {x_k, x_next, 0.5 * (x_k + x_next)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < 5; ++s) {
    Vec dir(spec.n);
    for (int j = 0; j < spec.n; ++j) dir(j) = normal(rng);
    starts.push_back(x_k + step * dir / std::max(dir.norm(), 1e-300));
  }

  const PieceSet pieces = prox_pieces(spec, x_k, mu, p);
  SmoothingSchedule schedule;
  struct Candidate {
    Vec y;
    double obj;
  };
  std::vector<Candidate> cands;
  CertificateRecord rec;
  for (const Vec& s : starts) {
    const PiecewiseMaxResult r = minimize_piecewise_max(pieces, spec.simple.project(s), spec.simple, schedule);
    rec.prox.inner_iterations += r.iterations;
    ++rec.prox.starts;
    const double obj = prox_objective(spec, r.x, x_k, mu, p);
    if (std::isfinite(obj)) cands.push_back({r.x, obj});
  }
  if (cands.empty()) throw Error(ErrorCode::NoConvergence, "proximal_certificate: no finite local solution");

  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::min(best, c.obj);
  const Candidate* pick = nullptr;
  for (const auto& c : cands) {
    if (c.obj <= best + 1e-8) {
      ++rec.prox.near_best;
      if (!pick || (c.y - x_k).norm() < (pick->y - x_k).norm()) pick = &c;
    }
  }

  rec.y = pick->y;
  rec.prox.objective = pick->obj;
  rec.y_dist = (rec.y - x_k).norm();
  rec.Sf_y = stationarity_measure(spec, rec.y);
  rec.mu = mu;
  rec.p = p;
  rec.ratio1 = step > 0 ? rec.y_dist / step : kNaN;
  if (rec.y_dist > 0) rec.ratio2 = rec.Sf_y / std::pow(rec.y_dist, p);
  else rec.ratio2 = rec.Sf_y == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double at_next = prox_objective(spec, x_next, x_k, mu, p);
  rec.chain_violation = pick->obj > at_next + 1e-10 * (1.0 + std::abs(at_next));
  rec.theta_hat = check_assumption3(spec, x_next, rec).value_or(kNaN);
  return rec;
}

double certificate_mu(const ProblemSpec& spec, const IterateTrace& trace, int k, double mu_factor) {
  const auto& rec = trace.records.at(static_cast<std::size_t>(k));
  const Vec& x_next = trace.x_next(k);
  Vec L = Vec::Zero(spec.m);
  if (rec.step_norm > 0) {
    const SurrogateModel model = build_taylor(spec, rec.x, trace.p, rec.M);
    const double scale = factorial(trace.p + 1) / std::pow(rec.step_norm, trace.p + 1);
    for (int i = 0; i < spec.m; ++i) {
      const double Fi = spec.inner[static_cast<std::size_t>(i)].eval(x_next);
      L(i) = std::abs(Fi - model.base_value(i, x_next)) * scale;
    }
  }
  return mu_factor * spec.outer.eval(rec.M + L);
}

std::vector<CertificateRecord> certify_trace(const ProblemSpec& spec, const IterateTrace& trace,
                                             const SolverConfig& config) {
  std::vector<CertificateRecord> out;
  if (config.certificate_every <= 0) return out;
  for (int k = 0; k < trace.iterations(); k += config.certificate_every) {
    const double mu = config.mu_override ? *config.mu_override : certificate_mu(spec, trace, k, config.mu_factor);
    const std::uint64_t seed = config.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k) + 1;
    CertificateRecord rec =
        proximal_certificate(spec, trace.records[static_cast<std::size_t>(k)].x, trace.x_next(k), mu, trace.p, seed);
    rec.k = k + 1;
    if (rec.chain_violation) log::info(spec.name, ": certificate ", rec.k, " missed the prox basin");
    out.push_back(std::move(rec));
  }
  return out;
}

Assumption2Report check_assumption2(const std::vector<CertificateRecord>& records, const IterateTrace& trace) {
  Assumption2Report rep;
  if (records.empty()) return rep;
  const int n = trace.iterations();
  const int tail_start = n - static_cast<int>(std::ceil(0.8 * n));
  rep.bound_checked = trace.all_global;
  bool within = true;
  for (const auto& r : records) {
    const int k = r.k - 1;
    if (k < tail_start || k >= n) continue;
    if (trace.records[static_cast<std::size_t>(k)].step_norm == 0.0 || r.y_dist == 0.0) continue;
    ++rep.used;
    rep.L1_hat = std::max(rep.L1_hat, r.ratio1);
    rep.L2_hat = std::max(rep.L2_hat, r.ratio2);
    if (r.ratio2 > 1.1 * r.mu / factorial(r.p)) within = false;
  }
  const bool finite = std::isfinite(rep.L1_hat) && std::isfinite(rep.L2_hat);
  rep.pass = finite && (!rep.bound_checked || within);
  return rep;
}

std::optional<double> check_assumption3(const ProblemSpec& spec, const Vec& x_next, const CertificateRecord& record) {
  if (record.y_dist == 0.0) return std::nullopt;
  const double fn = evaluate(spec, x_next).f;
  const double fy = evaluate(spec, record.y).f;
  return (fn - fy) * factorial(record.p + 1) / std::pow(record.y_dist, record.p + 1);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& series, unsigned laws) {
  if (laws == 0) throw Error(ErrorCode::InvalidArgument, "fit_rate: empty law set");
  std::vector<double> ks, logs;
  for (const auto& [k, v] : series) {
    if (!(v >= 1e-15)) break;
    if (k <= 0) continue;
    ks.push_back(k);
    logs.push_back(std::log(v));
  }
  if (ks.size() < 8) throw Error(ErrorCode::DegenerateSeries, "fit_rate: fewer than 8 usable points");

  RateFit out;
  out.k_lo = ks.front();
  out.k_hi = ks.back();
  out.power_residual = out.linear_residual = std::numeric_limits<double>::infinity();
  LineFit pw, ln;
  if (laws & kPowerLaw) {
    std::vector<double> lk(ks.size());
    std::transform(ks.begin(), ks.end(), lk.begin(), [](double k) { return std::log(k); });
    pw = least_squares_line(lk, logs);
    out.power_residual = pw.residual;
  }
  if (laws & kLinear) {
    ln = least_squares_line(ks, logs);
    out.linear_residual = ln.residual;
  }
  if (out.power_residual <= out.linear_residual) {
    out.law = RateLaw::PowerLaw;
    out.exponent = pw.slope;
    out.prefactor = std::exp(pw.intercept);
    out.residual = pw.residual;
  } else {
    out.law = RateLaw::Linear;
    out.factor = std::exp(ln.slope);
    out.prefactor = std::exp(ln.intercept);
    out.residual = ln.residual;
  }
  return out;
}

RecurrenceReport recurrence_report(double lambda0, double C1, double C2, double theta, int T) {
  if (!(theta > 0) || C1 < 0 || C2 < 0 || !(lambda0 > 0) || T < 1) {
    throw Error(ErrorCode::InvalidArgument, "recurrence_report: need theta > 0, C1, C2 >= 0, lambda0 > 0, T >= 1");
  }
  RecurrenceReport rep;
  rep.expected_ratio = (C1 + C2) / (1.0 + C1 + C2);
  rep.lambda.push_back(lambda0);
  rep.k0 = -1;
  const double floor = 1e-280;
  for (int k = 0; k < T; ++k) {
    const double lam = rep.lambda.back();
    if (lam <= floor) break;
    auto psi = [&](double d) { return C1 * std::pow(d, 1.0 / theta) + (1.0 + C2) * d - lam; };
    double delta;
    try {
      delta = solve_scalar_increasing(psi, 0.0, lam, 1e-15 * lam);
    } catch (const Error& e) {
      throw Error(ErrorCode::RootFindFailure, std::string("recurrence_report: ") + e.what());
    }
    if (rep.k0 < 0 && delta <= 1.0) rep.k0 = k;
    // lambda - delta cancels once delta ~ lambda; the right-hand side does not
    const double next = delta < 0.5 * lam ? lam - delta : C1 * std::pow(delta, 1.0 / theta) + C2 * delta;
    rep.lambda.push_back(std::max(0.0, next));
  }
  if (rep.k0 < 0) rep.k0 = static_cast<int>(rep.lambda.size()) - 1;

  const auto& lam = rep.lambda;
  const int K = static_cast<int>(lam.size());
  if (theta <= 1.0 || C1 == 0.0) {
    bool ok = true;
    for (int k = rep.k0; k + 1 < K; ++k) {
      if (lam[static_cast<std::size_t>(k)] <= floor) break;
      const double r = lam[static_cast<std::size_t>(k + 1)] / lam[static_cast<std::size_t>(k)];
      rep.max_ratio = std::max(rep.max_ratio, r);
      if (r > rep.expected_ratio + 1e-6) ok = false;
      if (theta == 1.0 && std::abs(r - rep.expected_ratio) > 1e-6) ok = false;
    }
    rep.pass = ok;
    rep.detail = "geometric, ratio <= " + std::to_string(rep.expected_ratio);
    return rep;
  }

  // theta > 1 with C1 > 0: lambda_k (k - k0)^{1/(theta-1)} stays bounded and the
  // tail decays with exponent -1/(theta-1).
  const double expo = 1.0 / (theta - 1.0);
  const int span = K - 1 - rep.k0;
  if (span < 16) {
    rep.detail = "sequence too short after k0";
    return rep;
  }
  auto product = [&](int k) { return lam[static_cast<std::size_t>(k)] * std::pow(k - rep.k0, expo); };
  double q2 = 0.0, q4 = 0.0;
  for (int k = rep.k0 + 1; k < K; ++k) {
    const int pos = (k - rep.k0) * 4 / (span + 1);
    if (pos == 1) q2 = std::max(q2, product(k));
    if (pos == 3) q4 = std::max(q4, product(k));
  }
  std::vector<double> lk, lv;
  for (int k = rep.k0 + span / 2; k < K; ++k) {
    lk.push_back(std::log(static_cast<double>(k - rep.k0)));
    lv.push_back(std::log(lam[static_cast<std::size_t>(k)]));
  }
  rep.fitted_exponent = least_squares_line(lk, lv).slope;
  const bool bounded = q4 <= 1.5 * q2;
  const bool slope_ok = std::abs(rep.fitted_exponent + expo) <= 0.1;
  rep.pass = bounded && slope_ok;
  rep.detail = "power law, fitted exponent " + std::to_string(rep.fitted_exponent) + " vs " + std::to_string(-expo);
  return rep;
}

bool recurrence_bound_check(double lambda0, double C1, double C2, double theta, int T) {
  return recurrence_report(lambda0, C1, C2, theta, T).pass;
}

std::vector<std::pair<int, double>> stationarity_products(const std::vector<CertificateRecord>& records, int p) {
  std::vector<const CertificateRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->k < b->k; });
  std::vector<std::pair<int, double>> out;
  double runmin = std::numeric_limits<double>::infinity();
  const double expo = static_cast<double>(p) / (p + 1);
  for (const auto* r : sorted) {
    runmin = std::min(runmin, r->Sf_y);
    out.emplace_back(r->k, runmin * std::pow(static_cast<double>(r->k), expo));
  }
  return out;
}

bool stationarity_product_bounded(const std::vector<CertificateRecord>& records, int p, int k_ref, double factor) {
  const auto prods = stationarity_products(records, p);
  std::optional<double> ref;
  for (const auto& [k, v] : prods) {
    if (k == k_ref) ref = v;
  }
  if (!ref) return false;
  for (const auto& [k, v] : prods) {
    if (k > k_ref && v > factor * *ref) return false;
  }
  return true;
}

ConvexEnvelope convex_rate_check(const ProblemSpec& spec, const IterateTrace& trace, const Vec& x_star,
                                 double f_star, double L) {
  ConvexEnvelope env;
  const int p = trace.p;
  Vec Mmax = Vec::Zero(spec.m);
  for (const auto& r : trace.records) {
    Mmax = Mmax.cwiseMax(r.M);
    env.R0 = std::max(env.R0, (r.x - x_star).norm());
  }
  env.R0 = std::max(env.R0, (trace.x_final - x_star).norm());
  env.gLe = spec.outer.eval(Mmax + Vec::Constant(spec.m, L));
  env.pass = true;
  for (int k = 1; k <= trace.iterations(); ++k) {
    const double fk = k < trace.iterations() ? trace.records[static_cast<std::size_t>(k)].f : trace.f_final;
    const double bound = std::pow(p + 1, p) * env.gLe * std::pow(env.R0, p + 1) / (factorial(p) * std::pow(k, p));
    env.gap.push_back(fk - f_star);
    env.bound.push_back(bound);
    if (!(fk - f_star <= bound)) env.pass = false;
  }
  return env;
}

std::string classify_kl_regime(const IterateTrace& trace, double f_best) {
  std::vector<std::pair<double, double>> series;
  for (const auto& r : trace.records) series.emplace_back(r.k, r.f - f_best);
  series.emplace_back(trace.iterations(), trace.f_final - f_best);
  try {
    const RateFit fit = fit_rate(series);
    return fit.law == RateLaw::Linear ? "linear" : "sublinear";
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateSeries) return "undetermined";
    throw;
  }
}

}  // namespace gcho
