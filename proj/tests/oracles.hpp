#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's solvers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Eigenvalues of [[a, b], [b, c]] from the characteristic polynomial.
inline std::pair<double, double> eig2(double a, double b, double c) {
  const double mid = 0.5 * (a + c);
  const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  return {mid - rad, mid + rad};
}

/// Exact min-norm point of conv(points) by enumerating every subset, solving
/// the affine problem on it and keeping the feasible (nonnegative) solutions.
inline double min_norm_faces(const std::vector<Vec>& pts) {
  const int l = static_cast<int>(pts.size());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << l); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < l; ++i) {
      if (mask & (1 << i)) idx.push_back(i);
    }
    const int k = static_cast<int>(idx.size());
    // [P'P 1; 1' 0] [w; nu] = [0; 1]
    Mat kkt = Mat::Zero(k + 1, k + 1);
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) kkt(a, b) = pts[idx[a]].dot(pts[idx[b]]);
      kkt(a, k) = 1.0;
      kkt(k, a) = 1.0;
    }
    Vec rhs = Vec::Zero(k + 1);
    rhs(k) = 1.0;
    const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    if ((kkt * sol - rhs).norm() > 1e-9) continue;
    bool feasible = true;
    Vec x = Vec::Zero(pts[0].size());
    for (int a = 0; a < k; ++a) {
      if (sol(a) < -1e-12) feasible = false;
      x += sol(a) * pts[idx[a]];
    }
    if (feasible) best = std::min(best, x.norm());
  }
  return best;
}

/// Brute force over the simplex grid {w : w_i = j_i * step, sum w = 1}.
inline double min_norm_grid(const std::vector<Vec>& pts, double step) {
  const int l = static_cast<int>(pts.size());
  const int N = static_cast<int>(std::lround(1.0 / step));
  const Eigen::Index n = pts[0].size();
  double best2 = std::numeric_limits<double>::infinity();
  if (l == 1) return pts[0].norm();
  if (l == 2) {
    for (int i = 0; i <= N; ++i) {
      const double w = static_cast<double>(i) / N;
      best2 = std::min(best2, (w * pts[0] + (1 - w) * pts[1]).squaredNorm());
    }
    return std::sqrt(best2);
  }
  // Last two weights swept incrementally: x = base + t (p_{l-2} - p_{l-1}).
  const Vec diff = pts[l - 2] - pts[l - 1];
  std::vector<int> j(static_cast<std::size_t>(l - 2), 0);
  while (true) {
    int used = 0;
    Vec base = Vec::Zero(n);
    for (int a = 0; a < l - 2; ++a) {
      used += j[static_cast<std::size_t>(a)];
      base += (static_cast<double>(j[static_cast<std::size_t>(a)]) / N) * pts[a];
    }
    if (used <= N) {
      const int rem = N - used;
      const double remw = static_cast<double>(rem) / N;
      const Vec x0 = base + remw * pts[l - 1];
      const Vec inc = diff / N;
      // ||x0 + t inc||^2 is a convex quadratic in t: the best integer t in
      // [0, rem] is the floor or ceiling of the continuous minimizer.
      const double ii = inc.squaredNorm();
      double tc = ii > 0 ? -x0.dot(inc) / ii : 0.0;
      tc = std::clamp(tc, 0.0, static_cast<double>(rem));
      for (double t : {std::floor(tc), std::ceil(tc)}) best2 = std::min(best2, (x0 + t * inc).squaredNorm());
    }
    int a = 0;
    while (a < l - 2) {
      if (++j[static_cast<std::size_t>(a)] <= N) break;
      j[static_cast<std::size_t>(a)] = 0;
      ++a;
    }
    if (a == l - 2) break;
  }
  return std::sqrt(best2);
}

/// <g,d> + 1/2 d'Hd + M/6 ||d||^3, written out independently of the library.
inline double cubic(const Mat& H, const Vec& g, double M, const Vec& d) {
  const double r = d.norm();
  return g.dot(d) + 0.5 * d.dot(H * d) + M * r * r * r / 6.0;
}

inline Mat random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = N(rng);
  return 0.5 * (a + a.transpose());
}

inline Vec random_vec(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

}  // namespace oracle
