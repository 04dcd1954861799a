#include "kcomb/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kcomb/error.hpp"

namespace kcomb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Curvature substituted along a flat or negative-curvature pair direction.
constexpr double kTau = 1e-12;

bool unit_coeffs(const Vector& s) {
  return (s.array().abs() == 1.0).all();
}

}  // namespace

void BoxQP::validate() const {
  const Eigen::Index n = Q.rows();
  if (Q.cols() != n || linear.size() != n || eq_coeffs.size() != n || lower.size() != n ||
      upper.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "QP blocks disagree in size");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower(i) <= upper(i))) {
      throw Error(ErrorCode::invalid_argument, "QP bound " + std::to_string(i) + " has lower > upper");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (Q(i, j) != Q(j, i)) throw Error(ErrorCode::invalid_argument, "QP quadratic term is not symmetric");
    }
  }
}

double BoxQP::objective(const Vector& alpha) const {
  return 0.5 * alpha.dot(Q * alpha) + linear.dot(alpha);
}

void SolverConfig::validate() const {
  if (!(kkt_tol > 0.0) || max_iterations == 0 || !(objective_tol > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "solver tolerances and iteration cap must be positive");
  }
}

KktReport certify_kkt(const BoxQP& problem, const Vector& alpha) {
  problem.validate();
  if (!unit_coeffs(problem.eq_coeffs)) {
    throw Error(ErrorCode::invalid_argument, "KKT certificate needs equality coefficients in {-1, +1}");
  }
  if (alpha.size() != problem.size()) {
    throw Error(ErrorCode::dimension_mismatch, "alpha does not match the problem size");
  }
  const Vector grad = problem.Q * alpha + problem.linear;
  const Vector& s = problem.eq_coeffs;

  KktReport report;
  double up_max = -kInf;
  double low_min = kInf;
  for (Eigen::Index t = 0; t < alpha.size(); ++t) {
    const double lo = problem.lower(t);
    const double hi = problem.upper(t);
    const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    report.bound_violation = std::max({report.bound_violation, lo - alpha(t), alpha(t) - hi});
    const bool below_upper = alpha(t) < hi - slack;
    const bool above_lower = alpha(t) > lo + slack;
    const double v = -s(t) * grad(t);
    const bool in_up = s(t) > 0 ? below_upper : above_lower;
    const bool in_low = s(t) > 0 ? above_lower : below_upper;
    if (in_up) up_max = std::max(up_max, v);
    if (in_low) low_min = std::min(low_min, v);
  }
  report.max_violation = (up_max == -kInf || low_min == kInf) ? 0.0 : std::max(0.0, up_max - low_min);
  report.equality_violation = std::abs(s.dot(alpha) - problem.eq_rhs);
  return report;
}

DualSolution solve_box_qp(const BoxQP& problem, Vector initial, const SolverConfig& cfg) {
  problem.validate();
  cfg.validate();
  if (!unit_coeffs(problem.eq_coeffs)) {
    throw Error(ErrorCode::invalid_argument, "SMO needs equality coefficients in {-1, +1}");
  }
  const Eigen::Index n = problem.size();
  if (initial.size() != n) throw Error(ErrorCode::dimension_mismatch, "initial point has the wrong size");

  const Matrix& Q = problem.Q;
  const Vector& s = problem.eq_coeffs;
  const Vector& lo = problem.lower;
  const Vector& hi = problem.upper;
  Vector& alpha = initial;
  Vector grad = Q * alpha + problem.linear;

  const auto objective = [&] { return 0.5 * alpha.dot(grad + problem.linear); };

  DualSolution out;
  std::size_t stalls = 0;
  const std::size_t stall_limit = std::max<std::size_t>(10 * static_cast<std::size_t>(n), 100);
  double gap = 0.0;
  double best_gap = kInf;
  double running_objective = objective();

  while (true) {
    // Maximal violating pair. Strict comparisons in ascending index order,
    // so the lowest index wins ties.
    Eigen::Index i = -1;
    Eigen::Index j = -1;
    double g_max = -kInf;
    double g_min = kInf;
    for (Eigen::Index t = 0; t < n; ++t) {
      const bool below_upper = alpha(t) < hi(t);
      const bool above_lower = alpha(t) > lo(t);
      const double v = -s(t) * grad(t);
      if ((s(t) > 0 ? below_upper : above_lower) && v > g_max) {
        g_max = v;
        i = t;
      }
      if ((s(t) > 0 ? above_lower : below_upper) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    gap = (i < 0 || j < 0) ? 0.0 : g_max - g_min;
    if (gap <= cfg.kkt_tol) {
      out.converged = true;
      break;
    }
    if (out.iterations >= cfg.max_iterations || stalls >= stall_limit) break;
    const bool gap_improved = gap < best_gap;
    best_gap = std::min(best_gap, gap);

    // Move a_i += s_i t, a_j -= s_j t; the slope along t is -gap.
    const double raw_curv = Q(i, i) + Q(j, j) - 2.0 * s(i) * s(j) * Q(i, j);
    const double curv_floor = -1e-10 * std::max(1.0, std::abs(Q(i, i)) + std::abs(Q(j, j)));
    if (raw_curv < curv_floor && !cfg.allow_indefinite) {
      throw Error(ErrorCode::numerical,
                  "negative curvature along pair (" + std::to_string(i) + ", " + std::to_string(j) +
                      "): Q is indefinite; repair it or allow indefinite solves");
    }
    const double curv = raw_curv > kTau ? raw_curv : kTau;
    const double limit_i = s(i) > 0 ? hi(i) - alpha(i) : alpha(i) - lo(i);
    const double limit_j = s(j) > 0 ? alpha(j) - lo(j) : hi(j) - alpha(j);
    double step = gap / curv;
    bool clip_i = false;
    bool clip_j = false;
    if (step >= limit_i) {
      step = limit_i;
      clip_i = true;
    }
    if (step >= limit_j) {
      step = limit_j;
      clip_j = true;
      clip_i = step >= limit_i;
    }

    const double old_i = alpha(i);
    const double old_j = alpha(j);
    alpha(i) = clip_i ? (s(i) > 0 ? hi(i) : lo(i)) : old_i + s(i) * step;
    alpha(j) = clip_j ? (s(j) > 0 ? lo(j) : hi(j)) : old_j - s(j) * step;
    const double d_i = alpha(i) - old_i;
    const double d_j = alpha(j) - old_j;
    grad += Q.col(i) * d_i + Q.col(j) * d_j;
    ++out.iterations;

    const double decrease = gap * step - 0.5 * raw_curv * step * step;
    running_objective -= decrease;
    // Tiny decreases are normal near the optimum (they shrink like gap^2);
    // only count them while the KKT gap is not improving either.
    if (decrease <= cfg.objective_tol * (1.0 + std::abs(running_objective)) && !gap_improved) {
      ++stalls;
    } else {
      stalls = 0;
    }
    if (cfg.on_step) cfg.on_step(out.iterations, objective());
  }

  // rho: mean of s_i g_i over free coordinates, else the midpoint of the
  // feasible interval (the finite end when the other is unbounded).
  double ub = kInf;
  double lb = -kInf;
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double sg = s(t) * grad(t);
    const bool at_upper = alpha(t) >= hi(t);
    const bool at_lower = alpha(t) <= lo(t);
    if (at_upper) {
      if (s(t) < 0) ub = std::min(ub, sg); else lb = std::max(lb, sg);
    } else if (at_lower) {
      if (s(t) > 0) ub = std::min(ub, sg); else lb = std::max(lb, sg);
    } else {
      free_sum += sg;
      ++free_count;
    }
  }
  if (free_count > 0) {
    out.offset_b = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    out.offset_b = 0.5 * (ub + lb);
  } else if (std::isfinite(ub)) {
    out.offset_b = ub;
  } else if (std::isfinite(lb)) {
    out.offset_b = lb;
  }

  out.objective = objective();
  out.kkt_residual = gap;
  out.alpha = std::move(alpha);
  return out;
}

BoxQP csvm_problem(const GramMatrix& G, const LabelDiagonal& y, double C) {
  const Eigen::Index n = G.size();
  if (y.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, "Gram matrix and labels differ in size");
  }
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorCode::invalid_argument, "C must be a finite positive number");
  BoxQP p;
  Vector yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[i];
  p.Q = (yv * yv.transpose()).cwiseProduct(G.entries());
  p.linear = Vector::Constant(n, -1.0);
  p.eq_coeffs = yv;
  p.eq_rhs = 0.0;
  p.lower = Vector::Zero(n);
  p.upper = Vector::Constant(n, C);
  return p;
}

DualSolution solve_csvm_dual(const GramMatrix& G, const LabelDiagonal& y, double C, const SolverConfig& cfg) {
  BoxQP p = csvm_problem(G, y, C);
  const auto labels = y.labels();
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::invalid_argument, "C-SVM needs both classes; all labels are identical");
  }
  DualSolution sol = solve_box_qp(p, Vector::Zero(G.size()), cfg);
  sol.offset_b = -sol.offset_b;
  return sol;
}

namespace {

double oneclass_upper(Eigen::Index n, double nu) {
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::infeasible, "nu must lie in (0, 1]");
  const double nu_n = nu * static_cast<double>(n);
  if (nu_n < 1.0 - 1e-12) {
    throw Error(ErrorCode::infeasible,
                "nu * n = " + std::to_string(nu_n) + " < 1: no alpha in the box sums to one");
  }
  return 1.0 / nu_n;
}

}  // namespace

BoxQP oneclass_problem(const GramMatrix& G, double nu) {
  const Eigen::Index n = G.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "one-class problem needs at least one point");
  const double u = oneclass_upper(n, nu);
  BoxQP p;
  p.Q = G.entries();
  p.linear = Vector::Zero(n);
  p.eq_coeffs = Vector::Ones(n);
  p.eq_rhs = 1.0;
  p.lower = Vector::Zero(n);
  p.upper = Vector::Constant(n, u);
  return p;
}

DualSolution solve_oneclass_dual(const GramMatrix& G, double nu, const SolverConfig& cfg) {
  BoxQP p = oneclass_problem(G, nu);
  const Eigen::Index n = G.size();
  Vector start = Vector::Zero(n);
  double remaining = 1.0;
  for (Eigen::Index i = 0; i < n && remaining > 0.0; ++i) {
    start(i) = std::min(p.upper(i), remaining);
    remaining -= start(i);
  }
  return solve_box_qp(p, std::move(start), cfg);
}

DualSolution brute_force_qp(const BoxQP& problem) {
  problem.validate();
  const Eigen::Index n = problem.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "empty QP");
  if (n > kBruteForceMaxSize) {
    throw Error(ErrorCode::invalid_argument,
                "brute-force enumeration is limited to n <= " + std::to_string(kBruteForceMaxSize));
  }
  const double scale = 1.0 + problem.Q.cwiseAbs().maxCoeff() + problem.linear.cwiseAbs().maxCoeff();

  // state[t]: 0 lower, 1 upper, 2 free
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  DualSolution best;
  best.objective = kInf;
  Vector alpha(n);
  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));

  while (true) {
    ++best.iterations;
    free_idx.clear();
    for (Eigen::Index t = 0; t < n; ++t) {
      const int st = state[static_cast<std::size_t>(t)];
      if (st == 2) {
        free_idx.push_back(t);
        alpha(t) = 0.0;
      } else {
        alpha(t) = st == 0 ? problem.lower(t) : problem.upper(t);
      }
    }

    bool feasible = true;
    double mu = 0.0;
    const auto k = static_cast<Eigen::Index>(free_idx.size());
    if (k == 0) {
      feasible = std::abs(problem.eq_coeffs.dot(alpha) - problem.eq_rhs) <= 1e-9 * (1.0 + std::abs(problem.eq_rhs));
    } else {
      // [Q_FF a_F; a_F' 0] [x; mu] = [-p_F - Q_FB a_B; rhs - a_B' a_B]
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      Vector rhs(k + 1);
      const Vector fixed_grad = problem.Q * alpha + problem.linear;  // free entries are zero here
      for (Eigen::Index r = 0; r < k; ++r) {
        const Eigen::Index fr = free_idx[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < k; ++c) kkt(r, c) = problem.Q(fr, free_idx[static_cast<std::size_t>(c)]);
        kkt(r, k) = problem.eq_coeffs(fr);
        kkt(k, r) = problem.eq_coeffs(fr);
        rhs(r) = -fixed_grad(fr);
      }
      rhs(k) = problem.eq_rhs - problem.eq_coeffs.dot(alpha);
      Eigen::FullPivLU<Matrix> lu(kkt);
      const Vector x = lu.solve(rhs);
      const double residual = (kkt * x - rhs).norm();
      if (!x.allFinite() || residual > 1e-9 * scale * (1.0 + x.norm())) {
        feasible = false;  // inconsistent system for this active set
      } else {
        for (Eigen::Index r = 0; r < k && feasible; ++r) {
          const Eigen::Index fr = free_idx[static_cast<std::size_t>(r)];
          const double v = x(r);
          const double slack = 1e-9 * (1.0 + std::abs(problem.upper(fr)) + std::abs(problem.lower(fr)));
          if (v < problem.lower(fr) - slack || v > problem.upper(fr) + slack) {
            feasible = false;
          } else {
            alpha(fr) = std::clamp(v, problem.lower(fr), problem.upper(fr));
          }
        }
        mu = x(k);
      }
    }

    if (feasible) {
      const double f = problem.objective(alpha);
      if (f < best.objective) {
        best.objective = f;
        best.alpha = alpha;
        best.offset_b = -mu;
      }
    }

    // next assignment in base 3
    Eigen::Index pos = 0;
    while (pos < n && state[static_cast<std::size_t>(pos)] == 2) {
      state[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
    ++state[static_cast<std::size_t>(pos)];
  }

  if (!std::isfinite(best.objective)) {
    throw Error(ErrorCode::infeasible, "no feasible active set found");
  }
  best.converged = true;
  best.kkt_residual = 0.0;
  return best;
}

}  // namespace kcomb
