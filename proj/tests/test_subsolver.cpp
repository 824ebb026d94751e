#include <doctest.h>

#include <cmath>
#include <random>

#include "gcho/subsolver.hpp"
#include "oracles.hpp"

using namespace gcho;

namespace {

ProblemSpec two_quadratics(double a, double b) {
  // max((x - a)^2, (x - b)^2) in one dimension
  ProblemSpec s;
  s.name = "pair";
  s.n = 1;
  s.m = 2;
  for (double c : {a, b}) {
    InnerOracle o;
    o.eval = [c](const Vec& x) { return (x(0) - c) * (x(0) - c); };
    o.grad = [c](const Vec& x) { return Vec::Constant(1, 2 * (x(0) - c)); };
    o.hess = [](const Vec&) { return Mat::Constant(1, 1, 2.0); };
    o.lipschitz.order1 = 2.0;
    o.lipschitz.order2 = 0.0;
    s.inner.push_back(o);
  }
  s.outer = OuterFunction::coord_max(2);
  s.x0 = Vec::Zero(1);
  return s;
}

// Global optimality of d for the cubic model:
//   (H + M r/2 I) d = -g  and  H + M r/2 I is positive semidefinite.
bool cubic_global_conditions(const Mat& H, const Vec& g, double M, const Vec& d, double tol) {
  const double r = d.norm();
  const Mat K = H + 0.5 * M * r * Mat::Identity(H.rows(), H.cols());
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(K).eigenvalues()(0);
  const double scale = 1 + g.norm() + H.norm();
  return (K * d + g).norm() <= tol * scale && lmin >= -tol * scale;
}

}  // namespace

TEST_CASE("cubic_step: examples") {
  const auto s = cubic_step(Mat::Constant(1, 1, 1.0), Vec::Constant(1, -1.0), 2.0);
  CHECK(s.radius == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-10));
  CHECK(s.d(0) == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-10));
  CHECK(!s.hard_case);
  CHECK(s.monotone);

  const auto h = cubic_step(Mat::Constant(1, 1, -1.0), Vec::Zero(1), 2.0);
  CHECK(h.hard_case);
  CHECK(h.d(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.model_value == doctest::Approx(-1.0 / 6.0));

  const auto z = cubic_step(Mat::Identity(3, 3), Vec::Zero(3), 1.0);
  CHECK(z.d.norm() == 0.0);
  CHECK(z.model_value == 0.0);

  Mat H2 = Mat::Zero(2, 2);
  H2.diagonal() << -2.0, 1.0;
  const auto h2 = cubic_step(H2, Vec::Zero(2), 1.0);
  CHECK(h2.d(0) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(std::abs(h2.d(1)) <= 1e-12);
}

TEST_CASE("cubic_step: errors") {
  Mat bad = Mat::Identity(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(cubic_step(bad, Vec::Ones(2), 1.0), Error);
  CHECK_THROWS_AS(cubic_step(Mat::Identity(2, 2), Vec::Ones(2), 0.0), Error);
}

TEST_CASE("cubic_step: 500 random instances against probes, line grid and optimality conditions") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> U(0.1, 5.0);
  int bad = 0, hard = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = t % 10 == 0 ? std::max(2, dim(rng)) : dim(rng);
    Mat H = oracle::random_symmetric(n, rng, 2.0);
    Vec g = oracle::random_vec(n, rng);
    const double M = U(rng);
    if (t % 10 == 0) {
      // planted hard case: g orthogonal to the bottom eigenvector, small elsewhere
      const Eigen::SelfAdjointEigenSolver<Mat> es(H);
      Vec lam = es.eigenvalues();
      lam(0) = -std::abs(lam(0)) - 1.0;
      for (int i = 1; i < n; ++i) lam(i) = std::max(lam(i), lam(0) + 0.5);
      H = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
      H = 0.5 * (H + H.transpose());
      Vec c = Vec::Zero(n);
      for (int i = 1; i < n; ++i) c(i) = 1e-3 * oracle::random_vec(1, rng)(0);
      g = es.eigenvectors() * c;
    }
    const auto s = cubic_step(H, g, M);
    hard += s.hard_case;
    const double m = oracle::cubic(H, g, M, s.d);
    const double tol = 1e-8 * (1 + std::abs(m));
    bool ok = std::abs(m - s.model_value) <= tol && s.monotone;
    ok = ok && cubic_global_conditions(H, g, M, s.d, 1e-7);
    const double R = 2 * (s.d.norm() + 1);
    std::normal_distribution<double> N(0, 1);
    std::uniform_real_distribution<double> U01(0, 1);
    for (int k = 0; k < 10000 && ok; ++k) {
      Vec dir(n);
      for (int i = 0; i < n; ++i) dir(i) = N(rng);
      dir.normalize();
      const Vec probe = R * std::pow(U01(rng), 1.0 / n) * dir;
      ok = m <= oracle::cubic(H, g, M, probe) + tol;
    }
    const Vec dir = s.d.norm() > 0 ? Vec(s.d.normalized()) : Vec::Unit(n, 0);
    for (int k = 0; k <= 1000 && ok; ++k) {
      const double a = -R + 2 * R * k / 1000.0;
      ok = m <= oracle::cubic(H, g, M, a * dir) + tol;
    }
    if (!ok) {
      ++bad;
      MESSAGE("instance " << t << " failed");
    }
  }
  CHECK(bad == 0);
  CHECK(hard >= 50);
}

TEST_CASE("solve_identity_p1: closed form and box projection") {
  const auto spec = two_quadratics(1.0, 1.0);
  ProblemSpec one = spec;
  one.m = 1;
  one.inner.resize(1);
  one.outer = OuterFunction::identity(1);
  const auto model = build_taylor(one, Vec::Constant(1, 3.0), 1, Vec::Constant(1, 8.0));
  const auto r = solve_identity_p1(model, SimpleTerm{});
  CHECK(r.x_next(0) == doctest::Approx(3.0 - 4.0 / 8.0));
  CHECK(r.global);
  CHECK(r.converged);

  const auto rb = solve_identity_p1(model, SimpleTerm::box(Vec::Constant(1, 2.8), Vec::Constant(1, 5.0)));
  CHECK(rb.x_next(0) == doctest::Approx(2.8));
}

TEST_CASE("solve_identity_p2_cubic: matches the cubic step of the aggregate") {
  const auto spec = registry_lookup("cvx-ls");
  const Vec x = spec.x0;
  const Vec M = Vec::Constant(spec.m, 0.5);
  const auto model = build_taylor(spec, x, 2, M);
  const auto r = solve_identity_p2_cubic(model, SimpleTerm{}, 1e-10);
  Vec g = Vec::Zero(3);
  Mat H = Mat::Zero(3, 3);
  for (const auto& c : model.components()) {
    g += c.grad;
    H += *c.hess;
  }
  CHECK(cubic_global_conditions(H, g, M.sum(), r.x_next - x, 1e-8));
  CHECK(r.global);
}

TEST_CASE("solve_subproblem: toymax order-1 step") {
  const auto spec = registry_lookup("toymax");
  SubsolverOptions opt;
  const auto model = build_taylor(spec, Vec::Constant(1, 2.0), 1, Vec::Constant(2, 4.0));
  const auto r = solve_subproblem(model, spec.outer, spec.simple, opt);
  CHECK(r.x_next(0) == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(r.model_value == doctest::Approx(2.0 * 0.75 * 0.75).epsilon(1e-9));
  CHECK(r.converged);
  CHECK(r.global);
  CHECK(verify_descent(r, evaluate(spec, Vec::Constant(1, 2.0)).f));
}

TEST_CASE("solve_subproblem: toymax fixed-point map on (1, 10]") {
  const auto spec = registry_lookup("toymax");
  SubsolverOptions opt;
  int bad = 0;
  for (int i = 1; i <= 90; ++i) {
    const double x = 1.0 + 0.1 * i;
    const auto model = build_taylor(spec, Vec::Constant(1, x), 1, Vec::Constant(2, 4.0));
    const auto r = solve_subproblem(model, spec.outer, spec.simple, opt);
    const double expect = (x * x + 1) / (2 * x);
    if (std::abs(r.x_next(0) - expect) > 1e-6 * expect) {
      ++bad;
      MESSAGE(x << " -> " << r.x_next(0) << " expected " << expect);
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("solve_subproblem: symmetric pair stays at the kink") {
  const auto spec = two_quadratics(1.0, -1.0);
  for (int p : {1, 2}) {
    const auto model = build_taylor(spec, Vec::Zero(1), p, Vec::Constant(2, 1.0));
    const auto r = solve_subproblem(model, spec.outer, spec.simple, SubsolverOptions{});
    CHECK(std::abs(r.x_next(0)) <= 1e-8);
    CHECK(r.model_value == doctest::Approx(1.0));
  }
}

TEST_CASE("solve_subproblem: one-component max equals the aggregate route") {
  const auto spec = two_quadratics(2.0, 2.0);
  ProblemSpec a = spec, b = spec;
  a.m = b.m = 1;
  a.inner.resize(1);
  b.inner.resize(1);
  a.outer = OuterFunction::identity(1);
  b.outer = OuterFunction::coord_max(1);
  for (int p : {1, 2}) {
    const auto ma = build_taylor(a, Vec::Constant(1, -1.0), p, Vec::Constant(1, 3.0));
    const auto mb = build_taylor(b, Vec::Constant(1, -1.0), p, Vec::Constant(1, 3.0));
    const auto ra = solve_subproblem(ma, a.outer, a.simple, SubsolverOptions{});
    const auto rb = solve_subproblem(mb, b.outer, b.simple, SubsolverOptions{});
    CHECK(ra.x_next(0) == doctest::Approx(rb.x_next(0)).epsilon(1e-8));
    CHECK(ra.model_value == doctest::Approx(rb.model_value).epsilon(1e-8));
  }
}

TEST_CASE("solve_subproblem: convex max models against random probes") {
  const auto spec = registry_lookup("cvx-quad-max");
  std::mt19937_64 rng(12);
  int bad = 0, chain = 0;
  for (int t = 0; t < 40; ++t) {
    const Vec x = oracle::random_vec(2, rng, 2.0);
    const double M = 0.1 + 0.1 * t;
    for (int p : {1, 2}) {
      const auto model = build_taylor(spec, x, p, Vec::Constant(spec.m, M));
      const auto r = solve_subproblem(model, spec.outer, spec.simple, SubsolverOptions{});
      const double v = spec.outer.eval(model.values(r.x_next));
      if (std::abs(v - r.model_value) > 1e-10 * (1 + std::abs(v))) ++bad;
      if (!r.global) ++bad;
      for (int k = 0; k < 2000; ++k) {
        const Vec y = r.x_next + oracle::random_vec(2, rng, 0.5);
        if (spec.outer.eval(model.values(y)) < v - 1e-8 * (1 + std::abs(v))) {
          ++bad;
          break;
        }
      }
      // direct check of the piecewise solver's smoothing chain
      PieceSet ps;
      ps.dim = 2;
      ps.count = spec.m;
      ps.values = [&](const Vec& y) { return model.values(y); };
      ps.derivatives = [&](const Vec& y, int j, Vec& g, Mat& H) {
        g = model.grad(j, y);
        H = model.hess(j, y);
      };
      chain += minimize_piecewise_max(ps, x, SimpleTerm{}, SmoothingSchedule{}).majorization_chain_failures;
    }
  }
  CHECK(bad == 0);
  CHECK(chain == 0);
}

TEST_CASE("piecewise helpers") {
  const Vec v = (Vec(3) << 1.0, 3.0, -2.0).finished();
  for (double mu : {1e-3, 0.1, 1.0, 10.0}) {
    const double s = log_sum_exp(v, mu);
    CHECK(s >= 3.0);
    CHECK(s <= 3.0 + mu * std::log(3.0) + 1e-14);
  }
  CHECK(log_sum_exp(Vec::Constant(2, 1e300), 1e-3) == doctest::Approx(1e300));

  const auto spec = registry_lookup("toymax");
  PieceSet ps;
  ps.dim = 1;
  ps.count = 2;
  ps.values = [&](const Vec& y) { return Vec((Vec(2) << spec.inner[0].eval(y), spec.inner[1].eval(y)).finished()); };
  ps.derivatives = [&](const Vec& y, int j, Vec& g, Mat& H) {
    g = spec.inner[static_cast<std::size_t>(j)].grad(y);
    H = spec.inner[static_cast<std::size_t>(j)].hess(y);
  };
  CHECK(piecewise_stationarity(ps, Vec::Constant(1, 1.0), 1e-12) == doctest::Approx(0.0));
  CHECK(piecewise_stationarity(ps, Vec::Constant(1, 2.0), 0.0) == doctest::Approx(4.0));
}

TEST_CASE("verify_descent") {
  SubproblemResult r;
  r.model_value = 1.0;
  CHECK(verify_descent(r, 1.0));
  CHECK(verify_descent(r, 2.0));
  CHECK(!verify_descent(r, 0.99));
  r.model_value = 1.0 + 1e-13;
  CHECK(verify_descent(r, 1.0));
}
