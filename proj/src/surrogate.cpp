#include "gcho/surrogate.hpp"

#include <cmath>
#include <random>

namespace gcho {

double factorial(int k) {
  double out = 1.0;
  for (int i = 2; i <= k; ++i) out *= i;
  return out;
}

double power_term(double weight, int p, const Vec& d) {
  return weight / factorial(p + 1) * std::pow(d.norm(), p + 1);
}

Vec power_term_grad(double weight, int p, const Vec& d) {
  const double r = d.norm();
  if (p == 1) return weight * d;
  if (r == 0.0) return Vec::Zero(d.size());
  return weight / factorial(p) * std::pow(r, p - 1) * d;
}

Mat power_term_hess(double weight, int p, const Vec& d) {
  const Eigen::Index n = d.size();
  if (p == 1) return weight * Mat::Identity(n, n);
  const double r = d.norm();
  if (r == 0.0) return Mat::Zero(n, n);
  const double c = weight / factorial(p);
  return c * (std::pow(r, p - 1) * Mat::Identity(n, n) + (p - 1) * std::pow(r, p - 3) * d * d.transpose());
}

SurrogateModel build_taylor(const ProblemSpec& spec, const Vec& x, int p, const Vec& M) {
  if (p < 1 || p > 2) throw Error(ErrorCode::InvalidArgument, "build_taylor: order must be 1 or 2");
  if (M.size() != spec.m || (M.array() <= 0).any()) {
    throw Error(ErrorCode::InvalidArgument, "build_taylor: regularization weights must be positive, one per component");
  }
  SurrogateModel model;
  model.kind_ = SurrogateModel::Kind::TaylorReg;
  model.order_ = p;
  model.center_ = x;
  model.reg_ = M;
  model.comps_.reserve(static_cast<std::size_t>(spec.m));
  for (const auto& oracle : spec.inner) {
    SurrogateModel::Component c;
    c.value = oracle.eval(x);
    c.grad = oracle.grad(x);
    if (!std::isfinite(c.value) || !c.grad.allFinite()) {
      throw Error(ErrorCode::OracleError, "non-finite oracle output at the model center");
    }
    if (p == 2) {
      if (!oracle.hess && !oracle.grad) throw Error(ErrorCode::MissingHessian, "order-2 model without Hessian");
      bool fd = false;
      c.hess = hessian_of(oracle, x, &fd);
      model.used_fd_hessian_ = model.used_fd_hessian_ || fd;
      if (!c.hess->allFinite()) throw Error(ErrorCode::OracleError, "non-finite Hessian at the model center");
    }
    model.comps_.push_back(std::move(c));
  }
  return model;
}

SurrogateModel build_proximal(const ProblemSpec& spec, const Vec& x, int r, const Vec& M) {
  if (r < 1) throw Error(ErrorCode::InvalidArgument, "build_proximal: order must be >= 1");
  if (M.size() != spec.m || (M.array() <= 0).any()) {
    throw Error(ErrorCode::InvalidArgument, "build_proximal: regularization weights must be positive");
  }
  SurrogateModel model;
  model.kind_ = SurrogateModel::Kind::Proximal;
  model.order_ = r;
  model.center_ = x;
  model.reg_ = M;
  model.oracles_ = spec.inner;
  for (const auto& oracle : spec.inner) {
    SurrogateModel::Component c;
    c.value = oracle.eval(x);
    c.grad = oracle.grad(x);
    model.comps_.push_back(std::move(c));
  }
  return model;
}

double SurrogateModel::base_value(int i, const Vec& y) const {
  const auto& c = comps_[static_cast<std::size_t>(i)];
  if (kind_ == Kind::Proximal) return oracles_[static_cast<std::size_t>(i)].eval(y);
  const Vec d = y - center_;
  double v = c.value + c.grad.dot(d);
  if (order_ == 2) v += 0.5 * d.dot(*c.hess * d);
  return v;
}

double SurrogateModel::value(int i, const Vec& y) const {
  return base_value(i, y) + power_term(reg_(i), order_, y - center_);
}

Vec SurrogateModel::values(const Vec& y) const {
  Vec out(size());
  for (int i = 0; i < size(); ++i) out(i) = value(i, y);
  return out;
}

Vec SurrogateModel::grad(int i, const Vec& y) const {
  const Vec d = y - center_;
  const auto& c = comps_[static_cast<std::size_t>(i)];
  Vec g;
  if (kind_ == Kind::Proximal) {
    g = oracles_[static_cast<std::size_t>(i)].grad(y);
  } else {
    g = c.grad;
    if (order_ == 2) g += *c.hess * d;
  }
  return g + power_term_grad(reg_(i), order_, d);
}

Mat SurrogateModel::hess(int i, const Vec& y) const {
  const Vec d = y - center_;
  const auto& c = comps_[static_cast<std::size_t>(i)];
  Mat h;
  if (kind_ == Kind::Proximal) {
    h = hessian_of(oracles_[static_cast<std::size_t>(i)], y);
  } else if (order_ == 2) {
    h = *c.hess;
  } else {
    h = Mat::Zero(dim(), dim());
  }
  return h + power_term_hess(reg_(i), order_, d);
}

std::vector<Vec> sample_ball(const Vec& center, double radius, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = center.size();
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Vec dir(n);
    for (Eigen::Index j = 0; j < n; ++j) dir(j) = normal(rng);
    const double nrm = dir.norm();
    if (nrm == 0.0) dir = Vec::Unit(n, 0);
    else dir /= nrm;
    const double rad = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
    out.push_back(center + rad * dir);
  }
  return out;
}

ErrorBoundReport certify(const SurrogateModel& model, const ProblemSpec& spec, double cloud_radius,
                         int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "certify: samples must be >= 1");
  const int m = model.size();
  const int p = model.order();
  const double fact = factorial(p + 1);
  ErrorBoundReport rep;
  rep.max_violation = Vec::Zero(m);
  rep.empirical_R = Vec::Constant(m, std::numeric_limits<double>::infinity());
  rep.empirical_Le = Vec::Zero(m);
  rep.pass = true;
  rep.samples = samples;
  for (const Vec& y : sample_ball(model.center(), cloud_radius, samples, seed)) {
    const double dist = (y - model.center()).norm();
    for (int i = 0; i < m; ++i) {
      const double fi = spec.inner[static_cast<std::size_t>(i)].eval(y);
      const double e = model.value(i, y) - fi;
      rep.max_violation(i) = std::max(rep.max_violation(i), -e);
      if (-e > 1e-10 * (1.0 + std::abs(fi))) rep.pass = false;
      if (dist > 0) {
        const double scaled = e * fact / std::pow(dist, p + 1);
        rep.empirical_R(i) = std::min(rep.empirical_R(i), scaled);
        rep.empirical_Le(i) = std::max(rep.empirical_Le(i), std::abs(scaled));
      }
    }
  }
  return rep;
}

bool check_model_convexity(const SurrogateModel& model, int samples, std::uint64_t seed, double radius) {
  const auto a = sample_ball(model.center(), radius, samples, seed);
  const auto b = sample_ball(model.center(), radius, samples, seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t s = 0; s < a.size(); ++s) {
    const Vec mid = 0.5 * (a[s] + b[s]);
    for (int i = 0; i < model.size(); ++i) {
      const double sa = model.value(i, a[s]);
      const double sb = model.value(i, b[s]);
      const double sm = model.value(i, mid);
      const double rhs = 0.5 * sa + 0.5 * sb;
      if (sm > rhs + 1e-10 * (1.0 + std::abs(rhs))) return false;
    }
  }
  return true;
}

}  // namespace gcho
