#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kcomb/data.hpp"
#include "kcomb/qp.hpp"

namespace kcomb {

/// Trained two-class SVM: f(x) = sum_i alpha_y_i k(x_i, x) + offset_b.
struct SvmModel {
  std::vector<std::size_t> support_indices;  // ascending, into the training set
  std::vector<double> alpha_y;               // alpha_i * y_i at each support index
  double offset_b = 0.0;
  double C = 1.0;
  std::size_t n_train = 0;
  // Kernel text form, or "combined"/"precomputed" when rows come from a matrix.
  std::string kernel = "precomputed";
  // Support points (one per row, aligned with support_indices) when the
  // training features were available.
  RowMatrix support_points;

  std::size_t support_count() const { return support_indices.size(); }
  double support_eps() const { return 1e-8 * C; }
  /// 0 < alpha < C, judged with the same eps that defines the support set.
  bool is_margin_support(std::size_t k) const;
};

SvmModel train(const LabeledDataset& data, const GramMatrix& G, double C, const SolverConfig& cfg,
               const std::string& kernel = "precomputed");

/// `k_row` holds kernel values against the support set, in support order.
double decision_value(const SvmModel& model, std::span<const double> k_row);

/// Sign rule with sign(0) = +1.
int predict_from_value(double value);
int predict(const SvmModel& model, std::span<const double> k_row);

/// Decision values for rows of an m x n_train kernel matrix (columns are all
/// training points; only the support columns are read).
Vector decision_values(const SvmModel& model, const Matrix& rows);
std::vector<int> predict_rows(const SvmModel& model, const Matrix& rows);

/// Decision value at a raw point; needs a closed-form kernel and stored
/// support points.
double decision_value_at(const SvmModel& model, const KernelSpec& spec, std::span<const double> x);

struct Evaluation {
  double error_percent = 0.0;
  double sv_percent = 0.0;
};

Evaluation evaluate(const SvmModel& model, const LabeledDataset& test, const Matrix& test_rows);

/// Versioned plain-text form (`kcomb-svm-model 1`). Doubles are written in
/// shortest round-trip notation, so save/load is lossless.
void save_model(const SvmModel& model, std::ostream& out);
SvmModel load_model(std::istream& in);

}  // namespace kcomb
