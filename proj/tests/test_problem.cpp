#include <doctest.h>

#include <cmath>
#include <random>

#include "gcho/problem.hpp"
#include "oracles.hpp"

using namespace gcho;

namespace {

// Central differences written out here rather than using the library helpers.
Vec central_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Mat central_jac(const std::function<Vec(const Vec&)>& g, const Vec& x, double h) {
  Mat J(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    J.col(i) = (g(a) - g(b)) / (2 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("evaluate: examples") {
  const auto ros = registry_lookup("mgh01:ls");
  CHECK(evaluate(ros, Vec::Ones(2)).f == doctest::Approx(0.0));
  const auto rmm = registry_lookup("mgh01:minmax");
  CHECK(evaluate(rmm, Vec::Ones(2)).f == doctest::Approx(0.0));
  const auto toy = registry_lookup("toymax");
  CHECK(evaluate(toy, Vec::Constant(1, 2.0)).f == doctest::Approx(3.0));
  const auto cv = evaluate(toy, Vec::Constant(1, 2.0));
  CHECK(cv.F_values(0) == doctest::Approx(3.0));
  CHECK(cv.F_values(1) == doctest::Approx(-3.0));
}

TEST_CASE("evaluate: box indicator gives an explicit infinity") {
  auto spec = registry_lookup("toymax");
  spec.simple = SimpleTerm::box(Vec::Constant(1, 0.0), Vec::Constant(1, 3.0));
  CHECK(std::isinf(evaluate(spec, Vec::Constant(1, 4.0)).f));
  CHECK(evaluate(spec, Vec::Constant(1, 2.0)).f == doctest::Approx(3.0));
}

TEST_CASE("subgradient_generators: examples") {
  const auto ros = registry_lookup("mgh01:ls");
  const Vec x = (Vec(2) << -1.2, 1.0).finished();
  const auto gens = subgradient_generators(ros, x);
  REQUIRE(gens.size() == 1);
  const Vec fd = central_grad([&](const Vec& y) { return evaluate(ros, y).f; }, x, 1e-6);
  CHECK((gens[0] - fd).norm() <= 1e-5 * (1 + fd.norm()));

  const auto toy = registry_lookup("toymax");
  const auto g2 = subgradient_generators(toy, Vec::Constant(1, 2.0));
  REQUIRE(g2.size() == 1);
  CHECK(g2[0](0) == doctest::Approx(4.0));

  const auto g1 = subgradient_generators(toy, Vec::Constant(1, 1.0));
  REQUIRE(g1.size() == 2);
  std::vector<double> vals = {g1[0](0), g1[1](0)};
  std::sort(vals.begin(), vals.end());
  CHECK(vals[0] == doctest::Approx(-2.0));
  CHECK(vals[1] == doctest::Approx(2.0));
  CHECK(stationarity_measure(toy, Vec::Constant(1, 1.0)) == doctest::Approx(0.0));
  CHECK(stationarity_measure(toy, Vec::Constant(1, 2.0)) == doctest::Approx(4.0));
}

TEST_CASE("subgradient_generators: box boundary is flagged") {
  auto spec = registry_lookup("toymax");
  spec.simple = SimpleTerm::box(Vec::Constant(1, 0.0), Vec::Constant(1, 2.0));
  try {
    subgradient_generators(spec, Vec::Constant(1, 2.0));
    FAIL("expected OnBoundary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OnBoundary);
  }
  CHECK_NOTHROW(subgradient_generators(spec, Vec::Constant(1, 1.5)));
}

TEST_CASE("registry: shipped problems") {
  const auto r = registry_lookup("mgh01:minmax");
  CHECK(r.n == 2);
  CHECK(r.m == 2);
  CHECK(r.x0(0) == doctest::Approx(-1.2));
  CHECK(r.x0(1) == doctest::Approx(1.0));
  REQUIRE(!r.known_solutions.empty());
  CHECK((r.known_solutions[0] - Vec::Ones(2)).norm() <= 1e-12);

  const auto f = registry_lookup("mgh02:minmax");
  CHECK(f.x0(0) == doctest::Approx(0.5));
  CHECK(f.x0(1) == doctest::Approx(-2.0));
  bool found = false;
  for (const Vec& s : f.known_solutions) found = found || (std::abs(s(0) - 11.41) < 0.01 && std::abs(s(1) + 0.89) < 0.01);
  CHECK(found);

  const auto t = registry_lookup("toymax");
  CHECK(t.n == 1);
  CHECK(t.x0(0) == doctest::Approx(2.0));

  for (const char* name : {"mgh05:ls", "mgh07:minmax", "mgh13:ls", "mgh14:minmax", "cvx-quad-max", "cvx-ls"}) {
    CHECK_NOTHROW(registry_lookup(name).validate());
  }
  CHECK(gated_mgh_problems().size() == 6);
}

TEST_CASE("registry: unknown names") {
  for (const char* name : {"mgh01", "mgh99:ls", "toymax:ls", "nothing"}) {
    try {
      registry_lookup(name);
      FAIL("expected UnknownProblem for " << name);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownProblem);
    }
  }
}

TEST_CASE("registry: oracle consistency by central differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (const auto& name : registry_names()) {
    const auto spec = registry_lookup(name);
    int bad = 0;
    for (int t = 0; t < 20; ++t) {
      Vec x = spec.x0;
      for (int j = 0; j < spec.n; ++j) x(j) += 0.1 * (1 + std::abs(x(j))) * N(rng);
      const double h = 1e-6 * (1 + x.norm());
      for (const auto& o : spec.inner) {
        const Vec g = o.grad(x);
        const Vec gfd = central_grad(o.eval, x, h);
        if ((g - gfd).norm() > 1e-4 * std::max(1.0, g.norm())) ++bad;
        if (o.hess) {
          const Mat H = o.hess(x);
          const Mat Hfd = central_jac(o.grad, x, h);
          if ((H - Hfd).norm() > 1e-4 * std::max(1.0, H.norm())) ++bad;
          if ((H - H.transpose()).norm() > 1e-12 * std::max(1.0, H.norm())) ++bad;
        }
      }
    }
    INFO(name);
    CHECK(bad == 0);
  }
}

TEST_CASE("outer functions: property suite") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N(0.0, 2.0);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  std::uniform_int_distribution<int> idx(0, 4);
  const std::vector<OuterFunction> outers = {OuterFunction::identity(5), OuterFunction::coord_max(5),
                                             OuterFunction::first_plus_max_penalty(5, 10.0),
                                             OuterFunction::first_plus_max_penalty(5, 0.0)};
  for (const auto& g : outers) {
    int bad = 0;
    for (int s = 0; s < 10000; ++s) {
      Vec y(5), z(5);
      for (int i = 0; i < 5; ++i) {
        y(i) = N(rng);
        z(i) = N(rng);
      }
      const double t = U(rng), alpha = U(rng);
      const double gy = g.eval(y);
      if (g.eval(y + t * Vec::Unit(5, idx(rng))) < gy - 1e-12) ++bad;
      const double lhs6 = g.eval(alpha * y), rhs6 = alpha * gy;
      if (lhs6 > rhs6 + 1e-12 * (1 + std::abs(rhs6))) ++bad;
      if (g.kind() != OuterFunction::Kind::FirstPlusMaxPenalty && std::abs(lhs6 - rhs6) > 1e-12 * (1 + std::abs(rhs6)))
        ++bad;
      const double lhs7 = g.eval(y + t * z), rhs7 = gy + t * g.eval(z);
      if (lhs7 > rhs7 + 1e-12 * (1 + std::abs(rhs7))) ++bad;
      for (const Vec& u : g.subdiff_generators(y, default_act_tol(gy))) {
        if ((u.array() < 0).any()) ++bad;
        if (std::abs(u.dot(y) - gy) > 1e-8 * (1 + std::abs(gy))) ++bad;
      }
    }
    INFO(g.describe());
    CHECK(bad == 0);
  }
  CHECK(OuterFunction::first_plus_max_penalty(3, 0.0).degenerate_penalty());
  CHECK(!OuterFunction::first_plus_max_penalty(3, 1.0).degenerate_penalty());
}

TEST_CASE("outer functions: reference values") {
  const Vec y = (Vec(3) << 1.0, -2.0, 0.5).finished();
  CHECK(OuterFunction::identity(3).eval(y) == doctest::Approx(-0.5));
  CHECK(OuterFunction::coord_max(3).eval(y) == doctest::Approx(1.0));
  // y1 + rho max(0, y2, y3)
  CHECK(OuterFunction::first_plus_max_penalty(3, 10.0).eval(y) == doctest::Approx(6.0));
  const Vec neg = (Vec(3) << 1.0, -2.0, -0.5).finished();
  CHECK(OuterFunction::first_plus_max_penalty(3, 10.0).eval(neg) == doctest::Approx(1.0));
}

TEST_CASE("formulations: minmax <= ls <= m * minmax") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N(0.0, 1.0);
  for (const auto& base : gated_mgh_problems()) {
    const auto mm = registry_lookup(base + ":minmax");
    const auto ls = registry_lookup(base + ":ls");
    for (int t = 0; t < 50; ++t) {
      Vec x = mm.x0;
      for (int j = 0; j < mm.n; ++j) x(j) += (1 + std::abs(x(j))) * N(rng);
      const double a = evaluate(mm, x).f, b = evaluate(ls, x).f;
      CHECK(a <= b * (1 + 1e-14));
      CHECK(b <= mm.m * a * (1 + 1e-14));
    }
  }
}

TEST_CASE("hessian_of: finite-difference fallback is flagged") {
  auto spec = registry_lookup("mgh01:ls");
  InnerOracle o = spec.inner[0];
  const Vec x = (Vec(2) << 0.3, -0.7).finished();
  bool fd = true;
  const Mat exact = hessian_of(o, x, &fd);
  CHECK(!fd);
  o.hess = nullptr;
  const Mat approx = hessian_of(o, x, &fd);
  CHECK(fd);
  CHECK((approx - exact).norm() <= 1e-4 * (1 + exact.norm()));
}
