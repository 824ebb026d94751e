#pragma once

// Small problems whose inner components carry known Lipschitz hints.

#include <cmath>

#include "gcho/problem.hpp"

namespace hinted {

using gcho::InnerOracle;
using gcho::Mat;
using gcho::ProblemSpec;
using gcho::Vec;

inline ProblemSpec single(InnerOracle o, int n) {
  ProblemSpec s;
  s.name = "test";
  s.n = n;
  s.m = 1;
  s.inner = {std::move(o)};
  s.outer = gcho::OuterFunction::identity(1);
  s.x0 = Vec::Zero(n);
  return s;
}

inline InnerOracle cube() {
  InnerOracle o;
  o.eval = [](const Vec& x) { return x(0) * x(0) * x(0); };
  o.grad = [](const Vec& x) { return Vec::Constant(1, 3 * x(0) * x(0)); };
  o.hess = [](const Vec& x) { return Mat::Constant(1, 1, 6 * x(0)); };
  o.lipschitz.order2 = 6.0;
  return o;
}

// sin(a'x): gradient Lipschitz ||a||^2, Hessian Lipschitz ||a||^3.
inline InnerOracle ridge_sin(const Vec& a) {
  InnerOracle o;
  o.eval = [a](const Vec& x) { return std::sin(a.dot(x)); };
  o.grad = [a](const Vec& x) { return Vec(std::cos(a.dot(x)) * a); };
  o.hess = [a](const Vec& x) { return Mat(-std::sin(a.dot(x)) * a * a.transpose()); };
  o.lipschitz.order1 = a.squaredNorm();
  o.lipschitz.order2 = std::pow(a.norm(), 3);
  return o;
}

// log(1 + exp(a'x)): convex; |sigma''| <= 1/(6 sqrt 3) < 0.1.
inline InnerOracle ridge_softplus(const Vec& a) {
  auto sig = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  InnerOracle o;
  o.eval = [a](const Vec& x) {
    const double t = a.dot(x);
    return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  };
  o.grad = [a, sig](const Vec& x) { return Vec(sig(a.dot(x)) * a); };
  o.hess = [a, sig](const Vec& x) {
    const double s = sig(a.dot(x));
    return Mat(s * (1 - s) * a * a.transpose());
  };
  o.lipschitz.order1 = 0.25 * a.squaredNorm();
  o.lipschitz.order2 = 0.1 * std::pow(a.norm(), 3);
  return o;
}

inline InnerOracle neg_norm2(int n) {
  InnerOracle o;
  o.eval = [](const Vec& x) { return -x.squaredNorm(); };
  o.grad = [](const Vec& x) { return Vec(-2 * x); };
  o.hess = [n](const Vec&) { return Mat(-2 * Mat::Identity(n, n)); };
  o.lipschitz.order1 = 2.0;
  o.lipschitz.order2 = 0.0;
  return o;
}

inline std::vector<ProblemSpec> problems() {
  std::vector<ProblemSpec> out;
  out.push_back(single(ridge_sin((Vec(3) << 1.0, -0.5, 2.0).finished()), 3));
  out.push_back(single(ridge_softplus((Vec(2) << 1.5, -1.0).finished()), 2));
  out.back().convex = true;
  for (const char* name : {"cvx-ls", "cvx-quad-max"}) {
    const auto spec = gcho::registry_lookup(name);
    for (const auto& o : spec.inner) {
      out.push_back(single(o, spec.n));
      out.back().convex = true;
    }
  }
  return out;
}

}  // namespace hinted
