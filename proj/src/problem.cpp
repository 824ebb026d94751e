#include "gcho/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gcho {

OuterFunction::OuterFunction(Kind kind, int m, double rho) : kind_(kind), m_(m), rho_(rho) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "outer function needs m >= 1");
  switch (kind) {
    case Kind::Identity:
      pieces_.push_back(Vec::Ones(m));
      break;
    case Kind::CoordMax:
      for (int i = 0; i < m; ++i) pieces_.push_back(Vec::Unit(m, i));
      break;
    case Kind::FirstPlusMaxPenalty: {
      if (rho < 0) throw Error(ErrorCode::InvalidArgument, "penalty weight must be >= 0");
      pieces_.push_back(Vec::Unit(m, 0));
      for (int i = 1; i < m; ++i) {
        Vec u = Vec::Unit(m, 0);
        u(i) = rho;
        pieces_.push_back(u);
      }
      break;
    }
  }
}

OuterFunction OuterFunction::identity(int m) { return OuterFunction(Kind::Identity, m, 0.0); }
OuterFunction OuterFunction::coord_max(int m) { return OuterFunction(Kind::CoordMax, m, 0.0); }
OuterFunction OuterFunction::first_plus_max_penalty(int m, double rho) {
  return OuterFunction(Kind::FirstPlusMaxPenalty, m, rho);
}

double OuterFunction::eval(const Vec& y) const {
  if (y.size() != m_) throw Error(ErrorCode::InvalidArgument, "outer eval: wrong arity");
  switch (kind_) {
    case Kind::Identity:
      return y.sum();
    case Kind::CoordMax:
      return y.maxCoeff();
    case Kind::FirstPlusMaxPenalty: {
      double viol = 0.0;
      for (int i = 1; i < m_; ++i) viol = std::max(viol, y(i));
      return y(0) + rho_ * viol;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<int> OuterFunction::active_pieces(const Vec& y, double act_tol) const {
  const double gy = eval(y);
  std::vector<int> active;
  for (std::size_t j = 0; j < pieces_.size(); ++j) {
    if (pieces_[j].dot(y) >= gy - act_tol) active.push_back(static_cast<int>(j));
  }
  return active;
}

std::vector<Vec> OuterFunction::subdiff_generators(const Vec& y, double act_tol) const {
  std::vector<Vec> out;
  for (int j : active_pieces(y, act_tol)) out.push_back(pieces_[static_cast<std::size_t>(j)]);
  return out;
}

std::string OuterFunction::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Identity: os << "identity(m=" << m_ << ")"; break;
    case Kind::CoordMax: os << "coordmax(m=" << m_ << ")"; break;
    case Kind::FirstPlusMaxPenalty: os << "penalty(m=" << m_ << ",rho=" << rho_ << ")"; break;
  }
  return os.str();
}

SimpleTerm SimpleTerm::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || (lo.array() > hi.array()).any()) {
    throw Error(ErrorCode::InvalidArgument, "box bounds must satisfy lo <= hi");
  }
  SimpleTerm t;
  t.kind_ = Kind::BoxIndicator;
  t.lo_ = std::move(lo);
  t.hi_ = std::move(hi);
  return t;
}

double SimpleTerm::eval(const Vec& x) const {
  if (kind_ == Kind::Zero) return 0.0;
  if ((x.array() < lo_.array()).any() || (x.array() > hi_.array()).any()) {
    return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

Vec SimpleTerm::project(const Vec& x) const {
  if (kind_ == Kind::Zero) return x;
  return x.cwiseMax(lo_).cwiseMin(hi_);
}

bool SimpleTerm::on_boundary(const Vec& x) const {
  if (kind_ == Kind::Zero) return false;
  return ((x.array() <= lo_.array()) || (x.array() >= hi_.array())).any();
}

int ProblemSpec::smoothness_order() const {
  int p = 2;
  for (const auto& c : inner) p = std::min(p, c.smoothness_order);
  return p;
}

void ProblemSpec::validate() const {
  if (static_cast<int>(inner.size()) != m) {
    throw Error(ErrorCode::InvalidArgument, name + ": inner oracle count does not match m");
  }
  if (outer.arity() != m) throw Error(ErrorCode::InvalidArgument, name + ": outer arity does not match m");
  if (x0.size() != n) throw Error(ErrorCode::InvalidArgument, name + ": x0 has wrong dimension");
  if (!std::isfinite(evaluate(*this, x0).f)) {
    throw Error(ErrorCode::InvalidArgument, name + ": x0 is outside dom f");
  }
}

CompositeValue evaluate(const ProblemSpec& spec, const Vec& x) {
  if (!x.allFinite()) throw Error(ErrorCode::NonFinite, "evaluate: non-finite point");
  CompositeValue out;
  out.F_values.resize(spec.m);
  for (int i = 0; i < spec.m; ++i) out.F_values(i) = spec.inner[static_cast<std::size_t>(i)].eval(x);
  const double h = spec.simple.eval(x);
  if (!std::isfinite(h)) {
    out.f = std::numeric_limits<double>::infinity();
    return out;
  }
  if (!out.F_values.allFinite()) {
    out.f = std::numeric_limits<double>::infinity();
    return out;
  }
  out.f = spec.outer.eval(out.F_values) + h;
  return out;
}

double default_act_tol(double g_value) { return 1e-8 * (1.0 + std::abs(g_value)); }

std::vector<Vec> subgradient_generators(const ProblemSpec& spec, const Vec& x, std::optional<double> act_tol) {
  if (spec.simple.kind() == SimpleTerm::Kind::BoxIndicator) {
    if (!std::isfinite(spec.simple.eval(x))) {
      throw Error(ErrorCode::InvalidArgument, "subgradient_generators: point outside the box");
    }
    if (spec.simple.on_boundary(x)) {
      throw Error(ErrorCode::OnBoundary, "subgradient_generators: point on the box boundary");
    }
  }
  const CompositeValue v = evaluate(spec, x);
  const double gval = spec.outer.eval(v.F_values);
  const double tol = act_tol.value_or(default_act_tol(gval));
  const std::vector<Vec> weights = spec.outer.subdiff_generators(v.F_values, tol);

  std::vector<std::optional<Vec>> grads(static_cast<std::size_t>(spec.m));
  std::vector<Vec> out;
  for (const Vec& u : weights) {
    Vec gsum = Vec::Zero(spec.n);
    for (int i = 0; i < spec.m; ++i) {
      if (u(i) == 0.0) continue;
      auto& gi = grads[static_cast<std::size_t>(i)];
      if (!gi) gi = spec.inner[static_cast<std::size_t>(i)].grad(x);
      gsum += u(i) * *gi;
    }
    out.push_back(std::move(gsum));
  }
  return out;
}

double stationarity_measure(const ProblemSpec& spec, const Vec& x, std::optional<double> act_tol) {
  const auto gens = subgradient_generators(spec, x, act_tol);
  return min_norm_in_hull(gens, 1e-14).point.norm();
}

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    xp(i) = xi + h;
    const double fp = f(xp);
    xp(i) = xi - h;
    const double fm = f(xp);
    xp(i) = xi;
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h) {
  const Vec g0 = g(x);
  Mat jac(g0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    xp(i) = xi + h;
    const Vec gp = g(xp);
    xp(i) = xi - h;
    const Vec gm = g(xp);
    xp(i) = xi;
    jac.col(i) = (gp - gm) / (2 * h);
  }
  return jac;
}

Mat hessian_of(const InnerOracle& oracle, const Vec& x, bool* used_fallback) {
  if (oracle.hess) {
    if (used_fallback) *used_fallback = false;
    return oracle.hess(x);
  }
  if (!oracle.grad) throw Error(ErrorCode::MissingHessian, "no Hessian oracle and no gradient to difference");
  if (used_fallback) *used_fallback = true;
  const double h = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
  const Vec g0 = oracle.grad(x);
  Mat hess(x.size(), x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    hess.col(i) = (oracle.grad(xp) - g0) / h;
    xp(i) = x(i);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace gcho
