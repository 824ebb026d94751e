#pragma once

// Small dense kernels: symmetric eigendecomposition (cyclic Jacobi), a
// bracketed root finder for nondecreasing scalar functions, and Wolfe's
// min-norm-point algorithm for convex hulls of finitely many points.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "gcho/error.hpp"

namespace gcho {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

template <typename Scalar>
struct EigenDecomp {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;               // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eigenvectors;  // columns
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Eigenvalues are
/// returned in ascending order with matching eigenvector columns.
template <typename Derived>
EigenDecomp<typename Derived::Scalar> eigh(const Eigen::MatrixBase<Derived>& a_in) {
  using Scalar = typename Derived::Scalar;
  using MatS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (a_in.rows() != a_in.cols()) {
    throw Error(ErrorCode::InvalidArgument, "eigh: matrix is not square");
  }
  if (!a_in.allFinite()) throw Error(ErrorCode::NonFinite, "eigh: non-finite entry");

  const Eigen::Index n = a_in.rows();
  MatS a = a_in;
  const Scalar amax = n > 0 ? a.cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar asym = n > 0 ? (a - a.transpose()).cwiseAbs().maxCoeff() : Scalar(0);
  if (asym > Scalar(1e-12) * std::max(Scalar(1), amax)) {
    throw Error(ErrorCode::NonSymmetric, "eigh: asymmetry exceeds 1e-12 relative");
  }
  a = Scalar(0.5) * (a + a.transpose()).eval();

  MatS v = MatS::Identity(n, n);
  const Scalar fro = a.norm();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  int sweep = 0;
  for (; sweep < 100; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2 * off) <= eps * fro || fro == Scalar(0)) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar theta = (a(q, q) - a(p, p)) / (2 * apq);
        Scalar t;
        if (std::abs(theta) > Scalar(1e150)) {
          t = Scalar(1) / (2 * theta);
        } else {
          t = Scalar(1) / (std::abs(theta) + std::sqrt(theta * theta + 1));
          if (theta < 0) t = -t;
        }
        const Scalar c = Scalar(1) / std::sqrt(t * t + 1);
        const Scalar s = t * c;
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar arp = a(r, p);
          const Scalar arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar apr = a(p, r);
          const Scalar aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar vrp = v(r, p);
          const Scalar vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  EigenDecomp<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

/// Root of a continuous nondecreasing `phi` on [lo, hi] with phi(lo) <= 0 <= phi(hi).
/// Illinois false position, falling back to bisection whenever the secant
/// point is unusable or the bracket stops shrinking fast enough.
template <typename Scalar, typename Fn>
Scalar solve_scalar_increasing(Fn&& phi, Scalar lo, Scalar hi, Scalar tol) {
  if (!(lo <= hi)) throw Error(ErrorCode::BadBracket, "lo > hi");
  Scalar flo = phi(lo);
  Scalar fhi = phi(hi);
  if (std::isnan(flo) || std::isnan(fhi) || flo > 0 || fhi < 0) {
    throw Error(ErrorCode::BadBracket, "sign condition phi(lo) <= 0 <= phi(hi) fails");
  }
  if (flo == 0) return lo;
  if (fhi == 0) return hi;

  int side = 0;
  for (int it = 0; it < 2000; ++it) {
    const Scalar width = hi - lo;
    if (width <= tol) break;
    Scalar r;
    const bool finite_ends = std::isfinite(flo) && std::isfinite(fhi);
    if (finite_ends && (it % 4) != 3) {
      r = lo - flo * (hi - lo) / (fhi - flo);
      const Scalar margin = Scalar(1e-3) * width;
      if (!(r > lo + margin && r < hi - margin)) r = lo + Scalar(0.5) * width;
    } else {
      r = lo + Scalar(0.5) * width;
    }
    if (r <= lo || r >= hi) break;  // bracket at floating-point resolution
    const Scalar fr = phi(r);
    if (std::abs(fr) <= tol) return r;
    if (fr < 0) {
      lo = r;
      flo = fr;
      if (side == -1 && std::isfinite(fhi)) fhi *= Scalar(0.5);
      side = -1;
    } else {
      hi = r;
      fhi = fr;
      if (side == 1 && std::isfinite(flo)) flo *= Scalar(0.5);
      side = 1;
    }
  }
  return lo + Scalar(0.5) * (hi - lo);
}

template <typename Scalar>
struct MinNormResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> point;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeffs;
  int iterations = 0;
  bool certified = false;  // Wolfe criterion <p, g_i - p> >= -tol holds for every generator
};

namespace detail {

// Minimizes ||B a|| subject to sum(a) = 1 through the bordered normal equations.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> affine_min_norm(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b) {
  using MatS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VecS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index k = b.cols();
  MatS kkt = MatS::Zero(k + 1, k + 1);
  kkt.topLeftCorner(k, k) = b.transpose() * b;
  kkt.block(0, k, k, 1).setOnes();
  kkt.block(k, 0, 1, k).setOnes();
  VecS rhs = VecS::Zero(k + 1);
  rhs(k) = 1;
  VecS sol = kkt.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project_simplex(Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v) {
  std::vector<Scalar> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<Scalar>());
  Scalar cumsum = 0;
  Scalar tau = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const Scalar t = (cumsum - 1) / static_cast<Scalar>(i + 1);
    if (u[i] - t > 0) tau = t;
  }
  return (v.array() - tau).cwiseMax(Scalar(0)).matrix();
}

}  // namespace detail

/// Closest point to the origin in the convex hull of the columns of `points`.
/// Wolfe's algorithm; a projected-gradient pass on the simplex weights takes
/// over when the corral iteration stalls before certifying optimality.
template <typename Derived>
MinNormResult<typename Derived::Scalar> min_norm_in_hull(const Eigen::MatrixBase<Derived>& points,
                                                         typename Derived::Scalar tol) {
  using Scalar = typename Derived::Scalar;
  using MatS = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VecS = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const MatS p = points;
  const Eigen::Index n = p.rows();
  const Eigen::Index ell = p.cols();
  if (ell < 1) throw Error(ErrorCode::InvalidArgument, "min_norm_in_hull: empty point set");
  if (!p.allFinite()) throw Error(ErrorCode::NonFinite, "min_norm_in_hull: non-finite point");

  const VecS norms2 = p.colwise().squaredNorm().transpose();
  const Scalar scale = std::max(Scalar(1), norms2.maxCoeff());
  const Scalar pos_eps = Scalar(1e-13);

  auto wolfe_gap = [&](const VecS& x) {
    const VecS dots = p.transpose() * x;
    Eigen::Index j;
    const Scalar dmin = dots.minCoeff(&j);
    return std::make_pair(x.squaredNorm() - dmin, j);
  };

  MinNormResult<Scalar> out;
  VecS lambda = VecS::Zero(ell);
  Eigen::Index j0;
  norms2.minCoeff(&j0);
  std::vector<Eigen::Index> corral{j0};
  lambda(j0) = 1;
  VecS x = p.col(j0);

  int iters = 0;
  const int max_major = 50 * static_cast<int>(ell) + 100;
  for (; iters < max_major; ++iters) {
    const auto [gap, j] = wolfe_gap(x);
    if (gap <= tol * scale) {
      out.certified = true;
      break;
    }
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
    corral.push_back(j);

    for (int minor = 0; minor < static_cast<int>(ell) + 5; ++minor) {
      MatS b(n, static_cast<Eigen::Index>(corral.size()));
      for (std::size_t c = 0; c < corral.size(); ++c) b.col(static_cast<Eigen::Index>(c)) = p.col(corral[c]);
      const VecS alpha = detail::affine_min_norm<Scalar>(b);
      if ((alpha.array() > pos_eps).all()) {
        for (std::size_t c = 0; c < corral.size(); ++c) lambda(corral[c]) = alpha(static_cast<Eigen::Index>(c));
        break;
      }
      Scalar theta = 1;
      for (std::size_t c = 0; c < corral.size(); ++c) {
        const Scalar a = alpha(static_cast<Eigen::Index>(c));
        const Scalar l = lambda(corral[c]);
        if (a <= pos_eps && l - a > 0) theta = std::min(theta, l / (l - a));
      }
      for (std::size_t c = 0; c < corral.size(); ++c) {
        const Scalar a = alpha(static_cast<Eigen::Index>(c));
        lambda(corral[c]) = lambda(corral[c]) + theta * (a - lambda(corral[c]));
      }
      std::vector<Eigen::Index> kept;
      for (auto idx : corral) {
        if (lambda(idx) > pos_eps) {
          kept.push_back(idx);
        } else {
          lambda(idx) = 0;
        }
      }
      if (kept.empty()) {
        kept.push_back(j);
        lambda(j) = 1;
      }
      corral = std::move(kept);
    }
    lambda /= lambda.sum();
    x = p * lambda;
  }

  if (!out.certified) {
    // Projected gradient on the simplex weights.
    const Scalar lip = std::max(Scalar(1e-300), (p.transpose() * p).trace());
    VecS y = lambda;
    VecS prev = lambda;
    Scalar t = 1;
    for (int it = 0; it < 20000; ++it, ++iters) {
      const VecS grad = p.transpose() * (p * y);
      VecS next = detail::project_simplex<Scalar>(y - grad / lip);
      const Scalar tn = (1 + std::sqrt(1 + 4 * t * t)) / 2;
      y = next + ((t - 1) / tn) * (next - prev);
      prev = next;
      t = tn;
      if (wolfe_gap(p * next).first <= tol * scale) {
        lambda = next;
        out.certified = true;
        break;
      }
      lambda = next;
    }
    x = p * lambda;
  }

  out.point = x;
  out.coeffs = lambda;
  out.iterations = iters;
  if (!out.certified) out.certified = wolfe_gap(x).first <= tol * scale;
  return out;
}

inline MinNormResult<double> min_norm_in_hull(const std::vector<Vec>& points, double tol) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "min_norm_in_hull: empty point set");
  Mat p(points.front().size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) p.col(static_cast<Eigen::Index>(i)) = points[i];
  return min_norm_in_hull(p, tol);
}

}  // namespace gcho
