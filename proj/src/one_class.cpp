#include "kcomb/one_class.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kcomb/error.hpp"
#include "text_util.hpp"

namespace kcomb {

OneClassModel train_oneclass(const GramMatrix& G, double nu, const SolverConfig& cfg) {
  const DualSolution sol = solve_oneclass_dual(G, nu, cfg);
  if (!sol.converged) {
    throw Error(ErrorCode::not_converged,
                "one-class SMO stopped after " + std::to_string(sol.iterations) + " iterations with KKT gap " +
                    detail::format_double(sol.kkt_residual));
  }
  OneClassModel model;
  model.alpha = sol.alpha;
  model.offset_b = sol.offset_b;
  model.nu = nu;
  const double eps = 1e-8 * model.upper_bound();
  for (Eigen::Index i = 0; i < model.alpha.size(); ++i) {
    if (model.alpha(i) > eps) model.support_indices.push_back(static_cast<std::size_t>(i));
  }
  return model;
}

OneClassModel train_oneclass(const RowMatrix& X, const KernelSpec& kernel, double nu, const SolverConfig& cfg) {
  return train_oneclass(gram_matrix(kernel, X), nu, cfg);
}

double oc_score(const OneClassModel& model, std::span<const double> k_row) {
  if (static_cast<Eigen::Index>(k_row.size()) != model.alpha.size()) {
    throw Error(ErrorCode::dimension_mismatch, "kernel row has " + std::to_string(k_row.size()) +
                                                   " entries for " + std::to_string(model.alpha.size()) +
                                                   " training points");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < k_row.size(); ++i) s += model.alpha(static_cast<Eigen::Index>(i)) * k_row[i];
  return s;
}

int oc_decision(const OneClassModel& model, std::span<const double> k_row) {
  return oc_score(model, k_row) - model.offset_b >= 0.0 ? 1 : -1;
}

std::vector<std::size_t> stable_order(std::span<const double> g_values) {
  std::vector<std::size_t> idx(g_values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return g_values[a] < g_values[b]; });
  return idx;
}

namespace {

struct OrderShape {
  double nu_n;
  std::size_t full;   // coordinates at the upper bound
  double remainder;   // mass left for the next coordinate
};

OrderShape order_shape(std::span<const double> g, double nu) {
  const std::size_t n = g.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "no g values");
  for (const double v : g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "g values must be finite");
  }
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorCode::infeasible, "nu must lie in (0, 1]");
  OrderShape s{};
  s.nu_n = nu * static_cast<double>(n);
  if (s.nu_n < 1.0 - 1e-12) {
    throw Error(ErrorCode::infeasible, "nu * n = " + detail::format_double(s.nu_n) + " < 1");
  }
  // nu n within rounding of an integer is treated as that integer
  const double nearest = std::round(s.nu_n);
  const double floor_nu_n = std::abs(s.nu_n - nearest) <= 1e-12 * std::max(1.0, s.nu_n) ? nearest : std::floor(s.nu_n);
  s.full = std::min(static_cast<std::size_t>(floor_nu_n), n);
  const double cap = 1.0 / s.nu_n;
  s.remainder = std::max(0.0, 1.0 - static_cast<double>(s.full) * cap);
  if (s.full == n || s.remainder <= 1e-12) s.remainder = 0.0;
  return s;
}

}  // namespace

OrderSolution solve_order_lp(std::span<const double> g_values, double nu) {
  const OrderShape shape = order_shape(g_values, nu);
  const auto order = stable_order(g_values);
  const double cap = 1.0 / shape.nu_n;

  OrderSolution sol;
  sol.lambda = Vector::Zero(static_cast<Eigen::Index>(g_values.size()));
  std::size_t last = order.front();
  for (std::size_t k = 0; k < shape.full; ++k) {
    sol.lambda(static_cast<Eigen::Index>(order[k])) = cap;
    last = order[k];
  }
  if (shape.remainder > 0.0) {
    sol.lambda(static_cast<Eigen::Index>(order[shape.full])) = shape.remainder;
    last = order[shape.full];
  }
  sol.b_star = g_values[last];
  double obj = 0.0;
  for (std::size_t i = 0; i < g_values.size(); ++i) obj -= sol.lambda(static_cast<Eigen::Index>(i)) * g_values[i];
  sol.objective = obj;
  return sol;
}

OrderDual solve_order_dual(std::span<const double> g_values, double nu) {
  const OrderShape shape = order_shape(g_values, nu);
  const auto order = stable_order(g_values);
  // ceil(nu n)-th smallest, 1-based
  const std::size_t k = shape.remainder > 0.0 ? shape.full + 1 : shape.full;

  OrderDual d;
  d.b = g_values[order[k - 1]];
  d.xi = Vector::Zero(static_cast<Eigen::Index>(g_values.size()));
  double slack_sum = 0.0;
  for (std::size_t i = 0; i < g_values.size(); ++i) {
    const double xi = std::max(0.0, d.b - g_values[i]);
    d.xi(static_cast<Eigen::Index>(i)) = xi;
    slack_sum += xi;
  }
  d.objective = -d.b + slack_sum / shape.nu_n;
  return d;
}

}  // namespace kcomb
