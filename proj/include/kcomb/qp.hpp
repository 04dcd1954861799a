#pragma once

#include <cstddef>
#include <functional>

#include "kcomb/combiner.hpp"
#include "kcomb/kernel.hpp"

namespace kcomb {

/// min 1/2 a'Qa + linear'a  s.t.  eq_coeffs'a = eq_rhs,  lower <= a <= upper.
///
/// The SMO solver and the KKT certificate require eq_coeffs in {-1, +1};
/// brute_force_qp accepts any coefficients.
struct BoxQP {
  Matrix Q;
  Vector linear;
  Vector eq_coeffs;
  double eq_rhs = 0.0;
  Vector lower;
  Vector upper;

  Eigen::Index size() const { return Q.rows(); }
  void validate() const;
  double objective(const Vector& alpha) const;
};

struct SolverConfig {
  double kkt_tol = 1e-3;
  std::size_t max_iterations = 10'000'000;
  // A pair step that lowers the objective by less than this (relative) and
  // does not improve the best KKT gap counts as a stall; max(10 n, 100)
  // stalls in a row end the run unconverged.
  double objective_tol = 1e-12;
  // When false, a strictly negative curvature along a working pair is
  // rejected as an indefinite Q.
  bool allow_indefinite = false;
  // Called after every pair update with (iteration, objective).
  std::function<void(std::size_t, double)> on_step;

  void validate() const;
};

/// Dual solution. Objectives are always in minimization form.
///
/// For the generic solver, offset_b is rho: the value shared by eq_i * grad_i
/// over free coordinates. solve_csvm_dual converts it to the classifier
/// offset b = -rho; for the one-class dual rho is the threshold b*.
struct DualSolution {
  Vector alpha;
  double offset_b = 0.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Post-hoc certificate computed from scratch (fresh gradient), sharing no
/// state with the solver.
struct KktReport {
  double max_violation = 0.0;    // max over I_up of -s g  minus  min over I_low of -s g
  double bound_violation = 0.0;  // worst excursion outside [lower, upper]
  double equality_violation = 0.0;

  bool ok(double kkt_tol, double feas_tol = 1e-12) const {
    return max_violation <= kkt_tol && bound_violation <= feas_tol && equality_violation <= feas_tol;
  }
};

KktReport certify_kkt(const BoxQP& problem, const Vector& alpha);

/// SMO with maximal-violating-pair selection (lowest index wins ties),
/// started from a feasible `initial` point.
DualSolution solve_box_qp(const BoxQP& problem, Vector initial, const SolverConfig& cfg);

/// C-SVM dual: max sum a - 1/2 sum a_i a_j y_i y_j G_ij, sum a_i y_i = 0,
/// 0 <= a_i <= C. Returned offset_b is the classifier offset b.
DualSolution solve_csvm_dual(const GramMatrix& G, const LabelDiagonal& y, double C,
                             const SolverConfig& cfg);
BoxQP csvm_problem(const GramMatrix& G, const LabelDiagonal& y, double C);

/// One-class dual: min 1/2 a'Ga, sum a = 1, 0 <= a_i <= 1/(nu n).
/// Returned offset_b is the threshold b*.
DualSolution solve_oneclass_dual(const GramMatrix& G, double nu, const SolverConfig& cfg);
BoxQP oneclass_problem(const GramMatrix& G, double nu);

inline constexpr Eigen::Index kBruteForceMaxSize = 16;

/// Exhaustive active-set enumeration: every coordinate is tried at its lower
/// bound, its upper bound, or free; each equality-constrained KKT system is
/// solved and the best feasible candidate kept. Inconsistent systems are
/// skipped. 3^n candidates, so n <= 16.
DualSolution brute_force_qp(const BoxQP& problem);

}  // namespace kcomb
