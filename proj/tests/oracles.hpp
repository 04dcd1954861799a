#pragma once

// Test-only reference computations. None of these share code with the
// library routines they check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// max -sum lambda_i g_i  s.t.  sum lambda = 1, 0 <= lambda_i <= u, by
/// enumerating LP vertices: every coordinate at a bound except at most one.
inline double order_lp_by_vertices(const std::vector<double>& g, double nu) {
  const std::size_t n = g.size();
  const double u = 1.0 / (nu * static_cast<double>(n));
  double best = -std::numeric_limits<double>::infinity();
  const auto try_point = [&](const std::vector<double>& lam) {
    double s = 0.0, obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (lam[i] < -1e-12 || lam[i] > u + 1e-12) return;
      s += lam[i];
      obj -= lam[i] * g[i];
    }
    if (std::abs(s - 1.0) > 1e-9) return;
    best = std::max(best, obj);
  };
  std::vector<double> lam(n);
  for (std::size_t free = 0; free <= n; ++free) {  // free == n: pure vertex
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lam[i] = (mask >> i) & 1 ? u : 0.0;
        if (i == free) lam[i] = 0.0;
        s += lam[i];
      }
      if (free < n) {
        if ((mask >> free) & 1) continue;  // each assignment once
        lam[free] = 1.0 - s;
      }
      try_point(lam);
    }
  }
  return best;
}

/// Random symmetric PSD matrix A A' with A n x r, r in [1, n].
template <class Rng>
Eigen::MatrixXd random_psd(Eigen::Index n, Rng& rng) {
  std::uniform_int_distribution<Eigen::Index> rank(1, n);
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::Index r = rank(rng);
  Eigen::MatrixXd A(n, r);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < r; ++k) A(i, k) = z(rng);
  Eigen::MatrixXd G = A * A.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) G(i, j) = G(j, i);
  return G;
}

template <class Rng>
Eigen::MatrixXd random_symmetric(Eigen::Index n, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) M(i, j) = M(j, i) = u(rng);
  return M;
}

template <class Rng>
std::vector<int> random_labels(std::size_t n, Rng& rng, bool both_classes = true) {
  std::bernoulli_distribution coin(0.5);
  std::vector<int> y(n);
  for (auto& v : y) v = coin(rng) ? 1 : -1;
  if (both_classes && n >= 2) {
    y[0] = 1;
    y[1] = -1;
  }
  return y;
}

/// Spectral clip of a symmetric 2x2 matrix [[a, b], [b, d]] by hand:
/// eigenvalues from the characteristic polynomial, negative ones dropped.
inline Eigen::Matrix2d clip_2x2(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  const double l1 = mean + rad, l2 = mean - rad;
  Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
  const auto add = [&](double lam) {
    if (lam < 0.0) return;
    // eigenvector (b, lam - a), or a coordinate axis when b == 0
    Eigen::Vector2d v = b != 0.0 ? Eigen::Vector2d(b, lam - a)
                                 : (std::abs(lam - a) <= std::abs(lam - d) ? Eigen::Vector2d(1, 0)
                                                                            : Eigen::Vector2d(0, 1));
    v.normalize();
    out += lam * v * v.transpose();
  };
  add(l1);
  if (rad > 0.0) add(l2);
  return out;
}

/// Two opposite-label points, unclipped dual: alpha_1 = alpha_2 = a with
/// a = 2 / (G11 + G22 - 2 G12), and b from the margin condition at point 2.
struct TwoPoint {
  double alpha;
  double b;
};
inline TwoPoint two_point_csvm(double g11, double g12, double g22, int y1, int y2) {
  const double a = 2.0 / (g11 + g22 - 2.0 * g12);
  return {a, y2 - a * (y1 * g12 + y2 * g22)};
}

}  // namespace oracle
