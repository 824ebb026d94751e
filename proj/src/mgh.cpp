// Moré-Garbow-Hillstrom nonlinear systems plus the synthetic problems used by
// the experiments. Each MGH system is exposed through its squared residuals
// phi_i = r_i^2, aggregated either by a coordinate max (min-max form) or a sum
// (least-squares form).

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>

#include "gcho/problem.hpp"

namespace gcho {
namespace {

struct ResidualEval {
  Vec r;
  Mat jac;
  std::vector<Mat> hess;
};

struct ResidualSystem {
  std::string name;
  int n = 0;
  int m = 0;
  Vec x0;
  std::vector<Vec> solutions;
  std::optional<double> fstar;  // of the least-squares form
  bool gated = false;
  std::function<ResidualEval(const Vec&)> eval;
};

ResidualEval blank(int n, int m) {
  ResidualEval e;
  e.r = Vec::Zero(m);
  e.jac = Mat::Zero(m, n);
  e.hess.assign(static_cast<std::size_t>(m), Mat::Zero(n, n));
  return e;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ResidualSystem rosenbrock() {
  ResidualSystem s{"mgh01", 2, 2, vec({-1.2, 1.0}), {vec({1.0, 1.0})}, 0.0, true, {}};
  s.eval = [](const Vec& x) {
    auto e = blank(2, 2);
    e.r << 10 * (x(1) - x(0) * x(0)), 1 - x(0);
    e.jac << -20 * x(0), 10, -1, 0;
    e.hess[0](0, 0) = -20;
    return e;
  };
  return s;
}

ResidualSystem freudenstein_roth() {
  ResidualSystem s{"mgh02", 2, 2, vec({0.5, -2.0}),
                   {vec({5.0, 4.0}), vec({11.41277897, -0.89680525})}, 0.0, true, {}};
  s.eval = [](const Vec& x) {
    auto e = blank(2, 2);
    const double y = x(1);
    e.r << -13 + x(0) + ((5 - y) * y - 2) * y, -29 + x(0) + ((y + 1) * y - 14) * y;
    e.jac << 1, 10 * y - 3 * y * y - 2, 1, 3 * y * y + 2 * y - 14;
    e.hess[0](1, 1) = 10 - 6 * y;
    e.hess[1](1, 1) = 6 * y + 2;
    return e;
  };
  return s;
}

ResidualSystem brown_badly_scaled() {
  ResidualSystem s{"mgh04", 2, 3, vec({1.0, 1.0}), {vec({1e6, 2e-6})}, 0.0, false, {}};
  s.eval = [](const Vec& x) {
    auto e = blank(2, 3);
    e.r << x(0) - 1e6, x(1) - 2e-6, x(0) * x(1) - 2;
    e.jac << 1, 0, 0, 1, x(1), x(0);
    e.hess[2](0, 1) = e.hess[2](1, 0) = 1;
    return e;
  };
  return s;
}

ResidualSystem beale() {
  ResidualSystem s{"mgh05", 2, 3, vec({1.0, 1.0}), {vec({3.0, 0.5})}, 0.0, true, {}};
  s.eval = [](const Vec& x) {
    static constexpr double y[3] = {1.5, 2.25, 2.625};
    auto e = blank(2, 3);
    for (int i = 0; i < 3; ++i) {
      const int k = i + 1;
      const double pk = std::pow(x(1), k);
      e.r(i) = y[i] - x(0) * (1 - pk);
      e.jac(i, 0) = -(1 - pk);
      e.jac(i, 1) = x(0) * k * std::pow(x(1), k - 1);
      e.hess[static_cast<std::size_t>(i)](0, 1) = e.hess[static_cast<std::size_t>(i)](1, 0) =
          k * std::pow(x(1), k - 1);
      e.hess[static_cast<std::size_t>(i)](1, 1) = k > 1 ? x(0) * k * (k - 1) * std::pow(x(1), k - 2) : 0.0;
    }
    return e;
  };
  return s;
}

ResidualSystem helical_valley() {
  ResidualSystem s{"mgh07", 3, 3, vec({-1.0, 0.0, 0.0}), {vec({1.0, 0.0, 0.0})}, 0.0, true, {}};
  s.eval = [](const Vec& x) {
    constexpr double two_pi = 2 * std::numbers::pi;
    auto e = blank(3, 3);
    double theta;
    if (x(0) > 0) {
      theta = std::atan(x(1) / x(0)) / two_pi;
    } else if (x(0) < 0) {
      theta = std::atan(x(1) / x(0)) / two_pi + 0.5;
    } else {
      theta = x(1) >= 0 ? 0.25 : -0.25;
    }
    const double rho2 = x(0) * x(0) + x(1) * x(1);
    const double rho = std::sqrt(rho2);
    const double t1 = -x(1) / (two_pi * rho2);
    const double t2 = x(0) / (two_pi * rho2);
    const double t11 = x(0) * x(1) / (std::numbers::pi * rho2 * rho2);
    const double t22 = -t11;
    const double t12 = (x(1) * x(1) - x(0) * x(0)) / (two_pi * rho2 * rho2);

    e.r << 10 * (x(2) - 10 * theta), 10 * (rho - 1), x(2);
    e.jac << -100 * t1, -100 * t2, 10, 10 * x(0) / rho, 10 * x(1) / rho, 0, 0, 0, 1;
    e.hess[0](0, 0) = -100 * t11;
    e.hess[0](1, 1) = -100 * t22;
    e.hess[0](0, 1) = e.hess[0](1, 0) = -100 * t12;
    const double r3 = rho2 * rho;
    e.hess[1](0, 0) = 10 * x(1) * x(1) / r3;
    e.hess[1](1, 1) = 10 * x(0) * x(0) / r3;
    e.hess[1](0, 1) = e.hess[1](1, 0) = -10 * x(0) * x(1) / r3;
    return e;
  };
  return s;
}

ResidualSystem bard() {
  ResidualSystem s{"mgh08", 3, 15, vec({1.0, 1.0, 1.0}), {vec({0.08241056, 1.133036, 2.343695})},
                   8.21487e-3, false, {}};
  s.eval = [](const Vec& x) {
    static constexpr double y[15] = {0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39,
                                     0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39};
    auto e = blank(3, 15);
    for (int i = 0; i < 15; ++i) {
      const double u = i + 1;
      const double v = 16 - u;
      const double w = std::min(u, v);
      const double q = v * x(1) + w * x(2);
      auto& h = e.hess[static_cast<std::size_t>(i)];
      e.r(i) = y[i] - (x(0) + u / q);
      e.jac.row(i) << -1, u * v / (q * q), u * w / (q * q);
      const double q3 = q * q * q;
      h(1, 1) = -2 * u * v * v / q3;
      h(1, 2) = h(2, 1) = -2 * u * v * w / q3;
      h(2, 2) = -2 * u * w * w / q3;
    }
    return e;
  };
  return s;
}

ResidualSystem box3d() {
  ResidualSystem s{"mgh12", 3, 6, vec({0.0, 10.0, 20.0}),
                   {vec({1.0, 10.0, 1.0}), vec({10.0, 1.0, -1.0})}, 0.0, false, {}};
  s.eval = [](const Vec& x) {
    auto e = blank(3, 6);
    for (int i = 0; i < 6; ++i) {
      const double t = 0.1 * (i + 1);
      const double a = std::exp(-t * x(0));
      const double b = std::exp(-t * x(1));
      const double c = std::exp(-t) - std::exp(-10 * t);
      e.r(i) = a - b - x(2) * c;
      e.jac.row(i) << -t * a, t * b, -c;
      e.hess[static_cast<std::size_t>(i)](0, 0) = t * t * a;
      e.hess[static_cast<std::size_t>(i)](1, 1) = -t * t * b;
    }
    return e;
  };
  return s;
}

ResidualSystem powell_singular() {
  ResidualSystem s{"mgh13", 4, 4, vec({3.0, -1.0, 0.0, 1.0}), {Vec::Zero(4)}, 0.0, true, {}};
  s.eval = [](const Vec& x) {
    const double s5 = std::sqrt(5.0);
    const double s10 = std::sqrt(10.0);
    auto e = blank(4, 4);
    const double a = x(1) - 2 * x(2);
    const double b = x(0) - x(3);
    e.r << x(0) + 10 * x(1), s5 * (x(2) - x(3)), a * a, s10 * b * b;
    e.jac << 1, 10, 0, 0, 0, 0, s5, -s5, 0, 2 * a, -4 * a, 0, 2 * s10 * b, 0, 0, -2 * s10 * b;
    auto& h3 = e.hess[2];
    h3(1, 1) = 2;
    h3(1, 2) = h3(2, 1) = -4;
    h3(2, 2) = 8;
    auto& h4 = e.hess[3];
    h4(0, 0) = h4(3, 3) = 2 * s10;
    h4(0, 3) = h4(3, 0) = -2 * s10;
    return e;
  };
  return s;
}

ResidualSystem wood() {
  ResidualSystem s{"mgh14", 4, 6, vec({-3.0, -1.0, -3.0, -1.0}), {Vec::Ones(4)}, 0.0, true, {}};
  s.eval = [](const Vec& x) {
    const double s90 = std::sqrt(90.0);
    const double s10 = std::sqrt(10.0);
    auto e = blank(4, 6);
    e.r << 10 * (x(1) - x(0) * x(0)), 1 - x(0), s90 * (x(3) - x(2) * x(2)), 1 - x(2),
        s10 * (x(1) + x(3) - 2), (x(1) - x(3)) / s10;
    e.jac << -20 * x(0), 10, 0, 0,  //
        -1, 0, 0, 0,                //
        0, 0, -2 * s90 * x(2), s90,  //
        0, 0, -1, 0,                 //
        0, s10, 0, s10,              //
        0, 1 / s10, 0, -1 / s10;
    e.hess[0](0, 0) = -20;
    e.hess[2](2, 2) = -2 * s90;
    return e;
  };
  return s;
}

ResidualSystem kowalik_osborne() {
  ResidualSystem s{"mgh15", 4, 11, vec({0.25, 0.39, 0.415, 0.39}),
                   {vec({0.1928069, 0.1912823, 0.1230565, 0.1360623})}, 3.07505e-4, false, {}};
  s.eval = [](const Vec& x) {
    static constexpr double y[11] = {0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
                                     0.0456, 0.0342, 0.0323, 0.0235, 0.0246};
    static constexpr double uu[11] = {4.0, 2.0, 1.0, 0.5, 0.25, 0.167, 0.125, 0.1, 0.0833, 0.0714, 0.0625};
    auto e = blank(4, 11);
    for (int i = 0; i < 11; ++i) {
      const double u = uu[i];
      const double a = u * u + u * x(1);
      const double num = x(0) * a;
      const double den = u * u + u * x(2) + x(3);
      const double d2 = den * den;
      const double d3 = d2 * den;
      e.r(i) = y[i] - num / den;
      e.jac.row(i) << -a / den, -x(0) * u / den, num * u / d2, num / d2;
      auto& h = e.hess[static_cast<std::size_t>(i)];
      // Hessian of num/den, negated below.
      h(0, 1) = h(1, 0) = u / den;
      h(0, 2) = h(2, 0) = -a * u / d2;
      h(0, 3) = h(3, 0) = -a / d2;
      h(1, 2) = h(2, 1) = -x(0) * u * u / d2;
      h(1, 3) = h(3, 1) = -x(0) * u / d2;
      h(2, 2) = 2 * num * u * u / d3;
      h(2, 3) = h(3, 2) = 2 * num * u / d3;
      h(3, 3) = 2 * num / d3;
      h = -h;
    }
    return e;
  };
  return s;
}

// Squared-residual component phi_i = r_i^2 of a residual system.
InnerOracle squared_residual(std::shared_ptr<const ResidualSystem> sys, int i) {
  InnerOracle o;
  o.eval = [sys, i](const Vec& x) {
    const double r = sys->eval(x).r(i);
    return r * r;
  };
  o.grad = [sys, i](const Vec& x) -> Vec {
    const auto e = sys->eval(x);
    return 2.0 * e.r(i) * e.jac.row(i).transpose();
  };
  o.hess = [sys, i](const Vec& x) -> Mat {
    const auto e = sys->eval(x);
    const Vec ji = e.jac.row(i).transpose();
    Mat h = 2.0 * ji * ji.transpose() + 2.0 * e.r(i) * e.hess[static_cast<std::size_t>(i)];
    return 0.5 * (h + h.transpose());
  };
  o.smoothness_order = 2;
  return o;
}

ProblemSpec from_residuals(const ResidualSystem& proto, const std::string& form) {
  auto sys = std::make_shared<const ResidualSystem>(proto);
  ProblemSpec spec;
  spec.name = proto.name + ":" + form;
  spec.n = proto.n;
  spec.m = proto.m;
  for (int i = 0; i < proto.m; ++i) spec.inner.push_back(squared_residual(sys, i));
  spec.outer = form == "minmax" ? OuterFunction::coord_max(proto.m) : OuterFunction::identity(proto.m);
  spec.x0 = proto.x0;
  spec.known_solutions = proto.solutions;
  if (proto.fstar && *proto.fstar == 0.0) spec.known_fstar = 0.0;
  if (form == "ls" && proto.fstar) spec.known_fstar = proto.fstar;
  spec.gated = proto.gated;
  return spec;
}

InnerOracle quadratic_component(Mat q, Vec b, double c) {
  // F(x) = x^T Q x + b^T x + c with Q symmetric PSD.
  InnerOracle o;
  const Mat qs = 0.5 * (q + q.transpose());
  o.eval = [qs, b, c](const Vec& x) { return x.dot(qs * x) + b.dot(x) + c; };
  o.grad = [qs, b](const Vec& x) -> Vec { return 2.0 * qs * x + b; };
  o.hess = [qs](const Vec&) -> Mat { return 2.0 * qs; };
  o.smoothness_order = 2;
  o.lipschitz.order1 = 2.0 * eigh(qs).eigenvalues.cwiseAbs().maxCoeff();
  o.lipschitz.order2 = 0.0;
  return o;
}

ProblemSpec toymax() {
  ProblemSpec spec;
  spec.name = "toymax";
  spec.n = 1;
  spec.m = 2;
  const Mat one = Mat::Identity(1, 1);
  spec.inner.push_back(quadratic_component(one, Vec::Zero(1), -1.0));
  InnerOracle neg;
  neg.eval = [](const Vec& x) { return 1.0 - x(0) * x(0); };
  neg.grad = [](const Vec& x) -> Vec { return Vec::Constant(1, -2.0 * x(0)); };
  neg.hess = [](const Vec&) -> Mat { return Mat::Constant(1, 1, -2.0); };
  neg.lipschitz.order1 = 2.0;
  neg.lipschitz.order2 = 0.0;
  spec.inner.push_back(neg);
  spec.outer = OuterFunction::coord_max(2);
  spec.x0 = Vec::Constant(1, 2.0);
  spec.known_solutions = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  spec.known_fstar = 0.0;
  spec.gated = true;
  return spec;
}

// max(||x - a||^2, ||x + a||^2, ||x - c||^2 - 1): minimized at the origin with
// value ||a||^2 (the third piece stays inactive there).
ProblemSpec cvx_quad_max() {
  ProblemSpec spec;
  spec.name = "cvx-quad-max";
  spec.n = 2;
  spec.m = 3;
  const Vec a = vec({1.0, 0.5});
  const Vec c = vec({0.0, 0.5});
  const Mat id = Mat::Identity(2, 2);
  spec.inner.push_back(quadratic_component(id, -2.0 * a, a.squaredNorm()));
  spec.inner.push_back(quadratic_component(id, 2.0 * a, a.squaredNorm()));
  spec.inner.push_back(quadratic_component(id, -2.0 * c, c.squaredNorm() - 1.0));
  spec.outer = OuterFunction::coord_max(3);
  spec.x0 = vec({3.0, -2.0});
  spec.known_solutions = {Vec::Zero(2)};
  spec.known_fstar = a.squaredNorm();
  spec.convex = true;
  spec.gated = true;
  return spec;
}

// sum_i (a_i^T x - b_i)^2 for an inconsistent 4x3 system.
ProblemSpec cvx_ls() {
  Mat a(4, 3);
  a << 2.0, 0.5, 0.0,  //
      0.0, 1.0, -1.0,  //
      1.0, 0.0, 3.0,   //
      0.5, -1.5, 1.0;
  const Vec b = vec({1.0, -2.0, 0.5, 3.0});
  const Vec xstar = a.colPivHouseholderQr().solve(b);
  ProblemSpec spec;
  spec.name = "cvx-ls";
  spec.n = 3;
  spec.m = 4;
  for (int i = 0; i < 4; ++i) {
    const Vec ai = a.row(i).transpose();
    spec.inner.push_back(quadratic_component(ai * ai.transpose(), -2.0 * b(i) * ai, b(i) * b(i)));
  }
  spec.outer = OuterFunction::identity(4);
  spec.x0 = vec({10.0, -10.0, 10.0});
  spec.known_solutions = {xstar};
  spec.known_fstar = (a * xstar - b).squaredNorm();
  spec.convex = true;
  spec.gated = true;
  return spec;
}

// min x1 + x2 s.t. x1^2 + x2^2 <= 2 through the exact penalty with rho = 10.
ProblemSpec cvx_penalty() {
  ProblemSpec spec;
  spec.name = "cvx-penalty";
  spec.n = 2;
  spec.m = 2;
  spec.inner.push_back(quadratic_component(Mat::Zero(2, 2), Vec::Ones(2), 0.0));
  spec.inner.push_back(quadratic_component(Mat::Identity(2, 2), Vec::Zero(2), -2.0));
  spec.outer = OuterFunction::first_plus_max_penalty(2, 10.0);
  spec.x0 = vec({2.0, 0.5});
  spec.known_solutions = {vec({-1.0, -1.0})};
  spec.known_fstar = -2.0;
  spec.convex = true;
  return spec;
}

const std::map<std::string, std::function<ResidualSystem()>>& mgh_table() {
  static const std::map<std::string, std::function<ResidualSystem()>> table = {
      {"mgh01", rosenbrock},      {"mgh02", freudenstein_roth}, {"mgh04", brown_badly_scaled},
      {"mgh05", beale},           {"mgh07", helical_valley},    {"mgh08", bard},
      {"mgh12", box3d},           {"mgh13", powell_singular},   {"mgh14", wood},
      {"mgh15", kowalik_osborne},
  };
  return table;
}

const std::map<std::string, std::function<ProblemSpec()>>& synthetic_table() {
  static const std::map<std::string, std::function<ProblemSpec()>> table = {
      {"toymax", toymax},
      {"cvx-quad-max", cvx_quad_max},
      {"cvx-ls", cvx_ls},
      {"cvx-penalty", cvx_penalty},
  };
  return table;
}

}  // namespace

std::vector<std::string> registry_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : mgh_table()) {
    out.push_back(name + ":minmax");
    out.push_back(name + ":ls");
  }
  for (const auto& [name, _] : synthetic_table()) out.push_back(name);
  return out;
}

std::vector<std::string> gated_mgh_problems() {
  std::vector<std::string> out;
  for (const auto& [name, make] : mgh_table()) {
    if (make().gated) out.push_back(name);
  }
  return out;
}

ProblemSpec registry_lookup(const std::string& name) {
  if (auto it = synthetic_table().find(name); it != synthetic_table().end()) {
    ProblemSpec spec = it->second();
    spec.validate();
    return spec;
  }
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    const std::string base = name.substr(0, colon);
    const std::string form = name.substr(colon + 1);
    auto it = mgh_table().find(base);
    if (it != mgh_table().end() && (form == "ls" || form == "minmax")) {
      ProblemSpec spec = from_residuals(it->second(), form);
      spec.validate();
      return spec;
    }
  }
  throw Error(ErrorCode::UnknownProblem, "'" + name + "' is not in the registry");
}

}  // namespace gcho
