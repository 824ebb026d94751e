#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gcho/problem.hpp"

namespace gcho {

/// M / (p+1)! ||d||^{p+1} and its first two derivatives in d.
double power_term(double weight, int p, const Vec& d);
Vec power_term_grad(double weight, int p, const Vec& d);
Mat power_term_hess(double weight, int p, const Vec& d);

double factorial(int k);

/// Per-component upper model s_i(y; x) of F_i anchored at `center`:
///   TaylorReg: T_p F_i(y; x) + M_i/(p+1)! ||y - x||^{p+1}
///   Proximal:  F_i(y)        + M_i/(r+1)! ||y - x||^{r+1}
class SurrogateModel {
 public:
  enum class Kind { TaylorReg, Proximal };

  struct Component {
    double value = 0.0;
    Vec grad;
    std::optional<Mat> hess;
  };

  Kind kind() const { return kind_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(reg_.size()); }
  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  const Vec& reg_weights() const { return reg_; }
  const std::vector<Component>& components() const { return comps_; }
  bool used_fd_hessian() const { return used_fd_hessian_; }

  /// s_i(y) for one component and for all of them.
  double value(int i, const Vec& y) const;
  Vec values(const Vec& y) const;
  Vec grad(int i, const Vec& y) const;
  Mat hess(int i, const Vec& y) const;

  /// Taylor part only (TaylorReg); F_i(y) for Proximal.
  double base_value(int i, const Vec& y) const;

 private:
  friend SurrogateModel build_taylor(const ProblemSpec&, const Vec&, int, const Vec&);
  friend SurrogateModel build_proximal(const ProblemSpec&, const Vec&, int, const Vec&);

  Kind kind_ = Kind::TaylorReg;
  int order_ = 1;
  Vec center_;
  Vec reg_;
  std::vector<Component> comps_;
  std::vector<InnerOracle> oracles_;  // Proximal only
  bool used_fd_hessian_ = false;
};

SurrogateModel build_taylor(const ProblemSpec& spec, const Vec& x, int p, const Vec& M);
SurrogateModel build_proximal(const ProblemSpec& spec, const Vec& x, int r, const Vec& M);

struct ErrorBoundReport {
  Vec max_violation;  // per component: sampled max of (F_i - s_i)_+
  Vec empirical_R;    // per component: sampled min of e_i (p+1)! / ||y-x||^{p+1}
  Vec empirical_Le;   // per component: sampled max of |e_i| (p+1)! / ||y-x||^{p+1}
  bool pass = false;  // no violation beyond 1e-10 (1 + |F_i|)
  int samples = 0;
};

/// Uniform sample in the ball of `radius` around `center`.
std::vector<Vec> sample_ball(const Vec& center, double radius, int samples, std::uint64_t seed);

ErrorBoundReport certify(const SurrogateModel& model, const ProblemSpec& spec, double cloud_radius,
                         int samples, std::uint64_t seed);

/// Midpoint-convexity check of every TaylorReg component on random pairs
/// in the unit ball around the center.
bool check_model_convexity(const SurrogateModel& model, int samples, std::uint64_t seed,
                           double radius = 1.0);

}  // namespace gcho
