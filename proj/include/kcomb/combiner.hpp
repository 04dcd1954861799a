#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcomb/kernel.hpp"

namespace kcomb {

/// The diagonal label matrix Y = diag(y), entries in {-1, +1}.
class LabelDiagonal {
 public:
  explicit LabelDiagonal(std::vector<int> labels);

  Eigen::Index size() const { return static_cast<Eigen::Index>(labels_.size()); }
  int operator[](Eigen::Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  std::span<const int> labels() const { return labels_; }
  LabelDiagonal flipped() const;

 private:
  std::vector<int> labels_;
};

// How the deviation between kernel matrices enters the combination.
//   abs        K_bar + Y sum_m |K_m - K_bar| Y
//   half_abs   K_bar + Y sum_{a<b} 1/2 |K_a - K_b| Y        (two kernels: max/min rule)
//   threshold  as half_abs, but pairwise gaps with |gap| <= threshold count as zero
enum class GFunction { abs, half_abs, threshold };

// How combined rows are formed for points whose label is unknown.
//   average_fallback  use the label-free part K_bar
//   predicted_label   substitute a provisional label for the unknown one
enum class TestEvalMode { average_fallback, predicted_label };

struct CombinerConfig {
  GFunction g_function = GFunction::abs;
  double threshold = 0.0;
  TestEvalMode test_eval = TestEvalMode::predicted_label;

  friend bool operator==(const CombinerConfig&, const CombinerConfig&) = default;
};

/// Accepts comma-separated `combine=av|abs|half_abs|threshold:<t>` and
/// `test_eval=avg|pred`. Unmentioned keys keep their defaults.
CombinerConfig parse_combiner_config(std::string_view text);
std::string to_string(const CombinerConfig& cfg);
std::string_view to_string(GFunction g);
std::string_view to_string(TestEvalMode mode);

/// max(K1, K2) on same-label pairs, min(K1, K2) otherwise.
GramMatrix combine_pairwise_maxmin(const GramMatrix& K1, const GramMatrix& K2, const LabelDiagonal& y);

/// 1/2 (K1 + K2) + 1/2 Y |K1 - K2| Y with the absolute value taken entrywise.
GramMatrix combine_abs_form(const GramMatrix& K1, const GramMatrix& K2, const LabelDiagonal& y);

/// Multi-kernel combination over M >= 1 matrices (row-parallel).
///
/// The mean is accumulated as K_1 + sum_m (K_m - K_1) / M, so equal inputs
/// give back K_1 bit for bit and the deviation term is exactly zero.
GramMatrix combine_multi(std::span<const GramMatrix> kernels, const LabelDiagonal& y,
                         const CombinerConfig& cfg);

/// Entrywise mean of M kernel matrices, same accumulation as combine_multi.
GramMatrix mean_kernel(std::span<const GramMatrix> kernels);

/// Combined kernel rows for unlabeled points against the labeled training set.
///
/// `cross_grams` are m x n matrices (row t = point t against every training
/// point). In predicted_label mode `provisional_labels` (length m) stands in
/// for the unknown labels.
Matrix combine_test_rows(std::span<const Matrix> cross_grams, const LabelDiagonal& y_train,
                         const CombinerConfig& cfg,
                         std::optional<std::span<const int>> provisional_labels = std::nullopt);

}  // namespace kcomb
