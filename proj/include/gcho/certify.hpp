#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gcho/driver.hpp"

namespace gcho {

struct ProxStats {
  int starts = 0;
  int inner_iterations = 0;
  int near_best = 0;          // starts ending within 1e-8 of the best objective
  double objective = 0.0;     // f(y) + mu/(p+1)! ||y - x_k||^{p+1}
};

/// Certificate point y_{k+1} built from the step x_k -> x_{k+1}.
struct CertificateRecord {
  int k = 0;                  // index of y, i.e. one past the step it certifies
  Vec y;
  double y_dist = 0.0;        // ||y - x_k||
  double Sf_y = 0.0;
  double ratio1 = 0.0;        // ||y - x_k|| / ||x_{k+1} - x_k||
  double ratio2 = 0.0;        // S_f(y) / ||y - x_k||^p
  double theta_hat = 0.0;     // NaN when ||y - x_k|| = 0
  double mu = 0.0;
  int p = 1;
  ProxStats prox;
  bool chain_violation = false;  // prox objective at y exceeds its value at x_{k+1}
};

/// argmin_y f(y) + mu/(p+1)! ||y - x_k||^{p+1} by multi-start descent,
/// ties broken toward x_k.
CertificateRecord proximal_certificate(const ProblemSpec& spec, const Vec& x_k, const Vec& x_next, double mu, int p,
                                       std::uint64_t seed = 0);

/// mu_factor * g(M_accepted + L_hat) with L_hat the observed Taylor error
/// constant of step k.
double certificate_mu(const ProblemSpec& spec, const IterateTrace& trace, int k, double mu_factor);

/// Certificates for every `every`-th step of a finished run.
std::vector<CertificateRecord> certify_trace(const ProblemSpec& spec, const IterateTrace& trace,
                                             const SolverConfig& config);

struct Assumption2Report {
  double L1_hat = 0.0;
  double L2_hat = 0.0;
  bool pass = false;
  bool bound_checked = false;  // ratio2 <= 1.1 mu/p! enforced (all subproblems global)
  int used = 0;
};

Assumption2Report check_assumption2(const std::vector<CertificateRecord>& records, const IterateTrace& trace);

/// (f(x_{k+1}) - f(y)) (p+1)! / ||y - x_k||^{p+1}; nullopt for a zero distance.
std::optional<double> check_assumption3(const ProblemSpec& spec, const Vec& x_next, const CertificateRecord& record);

enum class RateLaw { PowerLaw, Linear };
enum LawSet : unsigned { kPowerLaw = 1u, kLinear = 2u, kBothLaws = 3u };

struct RateFit {
  RateLaw law = RateLaw::PowerLaw;
  double exponent = 0.0;      // PowerLaw: v ~ c k^exponent
  double factor = 0.0;        // Linear:   v ~ c factor^k
  double prefactor = 0.0;
  double residual = 0.0;      // max |log v - fitted log v|
  double power_residual = 0.0;
  double linear_residual = 0.0;
  double k_lo = 0.0;
  double k_hi = 0.0;
};

/// Least-squares fits of log v against log k and against k.
RateFit fit_rate(const std::vector<std::pair<double, double>>& series, unsigned laws = kBothLaws);

struct RecurrenceReport {
  bool pass = false;
  std::vector<double> lambda;
  int k0 = 0;                     // first k with lambda_k - lambda_{k+1} <= 1
  double expected_ratio = 0.0;    // (C1+C2)/(1+C1+C2)
  double max_ratio = 0.0;         // over k >= k0
  double fitted_exponent = 0.0;   // theta > 1, C1 > 0
  std::string detail;
};

/// Builds lambda_{k+1} from  lambda_{k+1} = C1 (lambda_k - lambda_{k+1})^{1/theta} + C2 (lambda_k - lambda_{k+1})
/// and checks the predicted decay.
RecurrenceReport recurrence_report(double lambda0, double C1, double C2, double theta, int T);
bool recurrence_bound_check(double lambda0, double C1, double C2, double theta, int T);

/// Running minimum of S_f(y_j) times k^{p/(p+1)} for each certificate index k.
std::vector<std::pair<int, double>> stationarity_products(const std::vector<CertificateRecord>& records, int p);

/// Every product after k_ref stays within factor times the product at k_ref.
bool stationarity_product_bounded(const std::vector<CertificateRecord>& records, int p, int k_ref = 5,
                                  double factor = 3.0);

struct ConvexEnvelope {
  double R0 = 0.0;
  double gLe = 0.0;
  std::vector<double> gap;       // f(x_k) - f*, k = 1..K
  std::vector<double> bound;     // (p+1)^p g(L^e) R0^{p+1} / (p! k^p)
  bool pass = false;
};

/// Pointwise check of the convex sublinear rate. L is the known Lipschitz
/// constant of the p-th derivatives (0 for quadratics).
ConvexEnvelope convex_rate_check(const ProblemSpec& spec, const IterateTrace& trace, const Vec& x_star,
                                 double f_star, double L);

/// "linear" or "sublinear" from the better law on f(x_k) - f_best, or
/// "undetermined" when the gap series is too short.
std::string classify_kl_regime(const IterateTrace& trace, double f_best);

}  // namespace gcho
