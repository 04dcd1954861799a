#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kcomb/kernel.hpp"
#include "kcomb/qp.hpp"

namespace kcomb {

/// One-class SVM: h(x) = sign(sum_i alpha_i k(x_i, x) - b*).
struct OneClassModel {
  Vector alpha;                              // over every training point
  double offset_b = 0.0;                     // b*
  double nu = 1.0;
  std::vector<std::size_t> support_indices;  // alpha_i > support eps, ascending

  double upper_bound() const { return 1.0 / (nu * static_cast<double>(alpha.size())); }
};

OneClassModel train_oneclass(const GramMatrix& G, double nu, const SolverConfig& cfg);
OneClassModel train_oneclass(const RowMatrix& X, const KernelSpec& kernel, double nu, const SolverConfig& cfg);

/// sum_i alpha_i k_row_i, the estimated ordering function at a point.
double oc_score(const OneClassModel& model, std::span<const double> k_row);

/// +1 inside the estimated high-density region, -1 outside; sign(0) = +1.
int oc_decision(const OneClassModel& model, std::span<const double> k_row);

/// Solution of  max -sum lambda_i g_i  s.t. sum lambda = 1, 0 <= lambda_i <= 1/(nu n).
struct OrderSolution {
  Vector lambda;
  double b_star = 0.0;
  double objective = 0.0;
};

/// Closed form: mass 1/(nu n) on the floor(nu n) smallest g (stable order on
/// ties), the remainder on the next one. b_star is g at the last position
/// that received mass.
OrderSolution solve_order_lp(std::span<const double> g_values, double nu);

/// Solution of  min -b + 1/(nu n) sum xi_i  s.t. g_i >= b - xi_i, xi >= 0.
struct OrderDual {
  double b = 0.0;
  Vector xi;
  double objective = 0.0;
};

/// b is the ceil(nu n)-th smallest g (stable ties); when nu n is an integer
/// any b in [g_(k), g_(k+1)] is optimal and the lower end is taken.
OrderDual solve_order_dual(std::span<const double> g_values, double nu);

/// Indices sorted by (g, index).
std::vector<std::size_t> stable_order(std::span<const double> g_values);

}  // namespace kcomb
