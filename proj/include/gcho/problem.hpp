#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gcho/numerics.hpp"

namespace gcho {

/// Known Lipschitz constants of the first and second derivative of one
/// inner component, when the problem is synthetic enough to know them.
struct LipschitzHint {
  std::optional<double> order1;
  std::optional<double> order2;

  std::optional<double> at(int p) const { return p == 1 ? order1 : order2; }
};

/// One component F_i of the inner map with its derivative oracles.
struct InnerOracle {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;  // may be empty; see hessian_of()
  int smoothness_order = 2;
  LipschitzHint lipschitz;
};

/// Outer aggregation g. Every supported kind is a maximum of finitely many
/// nonnegative linear forms, g(y) = max_j <u_j, y>, which makes g convex,
/// nondecreasing and positively homogeneous; the forms double as the
/// vertices of the subdifferential.
class OuterFunction {
 public:
  enum class Kind { Identity, CoordMax, FirstPlusMaxPenalty };

  static OuterFunction identity(int m);
  static OuterFunction coord_max(int m);
  static OuterFunction first_plus_max_penalty(int m, double rho);

  Kind kind() const { return kind_; }
  int arity() const { return m_; }
  double rho() const { return rho_; }

  double eval(const Vec& y) const;

  /// Weight vectors u_j; g(y) = max_j <u_j, y>.
  const std::vector<Vec>& pieces() const { return pieces_; }

  /// Indices of pieces attaining the max within act_tol.
  std::vector<int> active_pieces(const Vec& y, double act_tol) const;

  /// Vertex weights u of the subdifferential at y (pieces within act_tol of g(y)).
  std::vector<Vec> subdiff_generators(const Vec& y, double act_tol) const;

  /// True when the penalty weight is zero and the constraints drop out of g.
  bool degenerate_penalty() const { return kind_ == Kind::FirstPlusMaxPenalty && rho_ == 0.0; }

  std::string describe() const;

 private:
  OuterFunction(Kind kind, int m, double rho);

  Kind kind_;
  int m_;
  double rho_;
  std::vector<Vec> pieces_;
};

/// The simple term h: zero or the indicator of a box.
class SimpleTerm {
 public:
  enum class Kind { Zero, BoxIndicator };

  static SimpleTerm zero() { return SimpleTerm(); }
  static SimpleTerm box(Vec lo, Vec hi);

  Kind kind() const { return kind_; }
  bool has_prox() const { return true; }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }

  double eval(const Vec& x) const;
  Vec project(const Vec& x) const;
  bool on_boundary(const Vec& x) const;

 private:
  Kind kind_ = Kind::Zero;
  Vec lo_;
  Vec hi_;
};

struct ProblemSpec {
  std::string name;
  int n = 0;
  int m = 0;
  std::vector<InnerOracle> inner;
  OuterFunction outer = OuterFunction::identity(1);
  SimpleTerm simple;
  Vec x0;
  std::vector<Vec> known_solutions;
  std::optional<double> known_fstar;
  bool gated = false;  // participates in pass/fail experiment gates
  bool convex = false;  // every F_i and h convex

  /// Lowest smoothness order over the components.
  int smoothness_order() const;
  void validate() const;
};

struct CompositeValue {
  Vec F_values;
  double f = 0.0;
};

CompositeValue evaluate(const ProblemSpec& spec, const Vec& x);

/// Default kink-detection tolerance 1e-8 (1 + |g(F(x))|).
double default_act_tol(double g_value);

/// Chain-rule generators sum_i u_i grad F_i(x), one per active outer piece u.
std::vector<Vec> subgradient_generators(const ProblemSpec& spec, const Vec& x,
                                        std::optional<double> act_tol = std::nullopt);

/// S_f(x): distance from the origin to the convex hull of the generators.
double stationarity_measure(const ProblemSpec& spec, const Vec& x,
                            std::optional<double> act_tol = std::nullopt);

/// Analytic Hessian when available, otherwise forward differences on the
/// gradient. `used_fallback` reports which path was taken.
Mat hessian_of(const InnerOracle& oracle, const Vec& x, bool* used_fallback = nullptr);

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h);
Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h);

// Benchmark registry.

/// Names accepted by registry_lookup(), including formulation suffixes.
std::vector<std::string> registry_names();

/// MGH problems take a `:ls` or `:minmax` suffix; synthetic problems are bare.
ProblemSpec registry_lookup(const std::string& name);

/// MGH base names whose rows are gated in the Table-1 experiment.
std::vector<std::string> gated_mgh_problems();

}  // namespace gcho
