#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcomb/combiner.hpp"
#include "kcomb/kernel.hpp"

namespace kcomb {

struct LabeledDataset {
  RowMatrix X;
  std::vector<int> y;
  std::vector<std::string> feature_names;
  std::string source_id;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
  LabelDiagonal labels() const { return LabelDiagonal(y); }
  bool has_both_classes() const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

/// Tokens mapped to +1 / -1. Anything else is rejected.
struct LabelMap {
  std::vector<std::string> positive{"+1", "1"};
  std::vector<std::string> negative{"-1"};
};

struct DelimitedOptions {
  char delimiter = ',';
  bool header = false;
  std::optional<std::size_t> label_column;  // default: last column
  LabelMap labels;
};

LabeledDataset load_delimited(const std::string& path, const DelimitedOptions& options = {});
LabeledDataset parse_delimited(std::istream& in, const std::string& source_id,
                               const DelimitedOptions& options = {});

/// `label idx:val idx:val ...` lines, 1-based indices, missing indices are 0.
/// The dimension is the largest index seen.
LabeledDataset load_sparse_format(const std::string& path, const LabelMap& labels = {});
LabeledDataset parse_sparse_format(std::istream& in, const std::string& source_id,
                                   const LabelMap& labels = {});

/// Repeated random train/test partitions.
struct SplitPlan {
  std::uint64_t master_seed = 42;
  std::size_t repetitions = 10;
  double train_fraction = 0.7;
};

struct Split {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Seed of the substream used by repetition r.
std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t repetition);

/// Uniform draw in [0, bound) from a 64-bit generator, bias-free and
/// independent of the standard library's distribution implementations.
template <class Engine>
std::uint64_t uniform_below(Engine& engine, std::uint64_t bound) {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = engine();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = engine();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Repetition r shuffles 0..n-1 with std::mt19937_64 seeded by
/// repetition_seed(master_seed, r) (Fisher-Yates, uniform_below) and takes
/// the first floor(train_fraction * n) indices as the training set.
std::vector<Split> make_splits(std::size_t n_points, const SplitPlan& plan);

enum class ScalingMode { none, unit_interval, zscore };

ScalingMode parse_scaling_mode(std::string_view text);
std::string_view to_string(ScalingMode mode);

/// Per-feature affine map x -> (x - shift) / scale, fitted on training data.
struct ScalingTransform {
  ScalingMode mode = ScalingMode::none;
  Vector shift;
  Vector scale;

  static ScalingTransform fit(const RowMatrix& train, ScalingMode mode);
  RowMatrix apply(const RowMatrix& X) const;
};

struct ScaledPair {
  LabeledDataset train;
  LabeledDataset test;
  ScalingTransform transform;
};

/// unit_interval: training min/max to [0, 1], constant features to 0.
/// zscore: training mean and population sd; zero-sd features are only centered.
ScaledPair fit_apply_scaling(const LabeledDataset& train, const LabeledDataset& test, ScalingMode mode);

}  // namespace kcomb
