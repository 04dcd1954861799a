#include "kcomb/combiner.hpp"

#include <algorithm>
#include <cmath>

#include "kcomb/error.hpp"
#include "text_util.hpp"

namespace kcomb {

LabelDiagonal::LabelDiagonal(std::vector<int> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1 && labels_[i] != -1) {
      throw Error(ErrorCode::invalid_argument,
                  "label " + std::to_string(i) + " is " + std::to_string(labels_[i]) + ", expected +1 or -1");
    }
  }
}

LabelDiagonal LabelDiagonal::flipped() const {
  std::vector<int> f(labels_.size());
  std::transform(labels_.begin(), labels_.end(), f.begin(), [](int v) { return -v; });
  return LabelDiagonal(std::move(f));
}

std::string_view to_string(GFunction g) {
  switch (g) {
    case GFunction::abs: return "av";
    case GFunction::half_abs: return "half_abs";
    case GFunction::threshold: return "threshold";
  }
  return "unknown";
}

std::string_view to_string(TestEvalMode mode) {
  return mode == TestEvalMode::average_fallback ? "avg" : "pred";
}

CombinerConfig parse_combiner_config(std::string_view text) {
  CombinerConfig cfg;
  for (const auto& [key, value] : detail::parse_key_values(text, ',')) {
    if (key == "combine") {
      if (value == "av" || value == "abs") {
        cfg.g_function = GFunction::abs;
      } else if (value == "half_abs") {
        cfg.g_function = GFunction::half_abs;
      } else if (value.rfind("threshold:", 0) == 0) {
        cfg.g_function = GFunction::threshold;
        cfg.threshold = detail::parse_double(std::string_view(value).substr(10), "threshold");
        if (cfg.threshold < 0.0) {
          throw Error(ErrorCode::invalid_argument, "combine threshold must be >= 0");
        }
      } else {
        throw Error(ErrorCode::parse_error,
                    "unknown combine rule '" + value + "' (av|half_abs|threshold:<t>)");
      }
    } else if (key == "test_eval") {
      if (value == "avg") {
        cfg.test_eval = TestEvalMode::average_fallback;
      } else if (value == "pred") {
        cfg.test_eval = TestEvalMode::predicted_label;
      } else {
        throw Error(ErrorCode::parse_error, "unknown test_eval '" + value + "' (avg|pred)");
      }
    } else {
      throw Error(ErrorCode::parse_error, "unknown combiner key '" + key + "'");
    }
  }
  return cfg;
}

std::string to_string(const CombinerConfig& cfg) {
  std::string combine(to_string(cfg.g_function));
  if (cfg.g_function == GFunction::threshold) combine += ":" + detail::format_double(cfg.threshold);
  return "combine=" + combine + ",test_eval=" + std::string(to_string(cfg.test_eval));
}

namespace {

void require_same_size(const GramMatrix& K, Eigen::Index n, const char* what) {
  if (K.size() != n) {
    throw Error(ErrorCode::dimension_mismatch, std::string(what) + ": size " + std::to_string(K.size()) +
                                                   " does not match " + std::to_string(n));
  }
}

// Mean of values[0..M) as v0 + sum (v_m - v0) / M.
double shifted_mean(const double* values, std::size_t M) {
  double acc = 0.0;
  for (std::size_t m = 1; m < M; ++m) acc += values[m] - values[0];
  return values[0] + acc / static_cast<double>(M);
}

double deviation(const double* values, std::size_t M, double mean, const CombinerConfig& cfg) {
  double dev = 0.0;
  if (cfg.g_function == GFunction::abs) {
    for (std::size_t m = 0; m < M; ++m) dev += std::abs(values[m] - mean);
    return dev;
  }
  for (std::size_t a = 0; a < M; ++a) {
    for (std::size_t b = a + 1; b < M; ++b) {
      const double gap = std::abs(values[a] - values[b]);
      if (cfg.g_function == GFunction::threshold && gap <= cfg.threshold) continue;
      dev += 0.5 * gap;
    }
  }
  return dev;
}

}  // namespace

GramMatrix combine_pairwise_maxmin(const GramMatrix& K1, const GramMatrix& K2, const LabelDiagonal& y) {
  const Eigen::Index n = y.size();
  require_same_size(K1, n, "first kernel");
  require_same_size(K2, n, "second kernel");
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double a = K1(i, j);
      const double b = K2(i, j);
      out(i, j) = y[i] == y[j] ? std::max(a, b) : std::min(a, b);
      out(j, i) = out(i, j);
    }
  }
  return GramMatrix(std::move(out), GramProvenance::combined);
}

GramMatrix combine_abs_form(const GramMatrix& K1, const GramMatrix& K2, const LabelDiagonal& y) {
  const Eigen::Index n = y.size();
  require_same_size(K1, n, "first kernel");
  require_same_size(K2, n, "second kernel");
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double a = K1(i, j);
      const double b = K2(i, j);
      out(i, j) = 0.5 * (a + b) + 0.5 * (y[i] * y[j]) * std::abs(a - b);
      out(j, i) = out(i, j);
    }
  }
  return GramMatrix(std::move(out), GramProvenance::combined);
}

GramMatrix combine_multi(std::span<const GramMatrix> kernels, const LabelDiagonal& y,
                         const CombinerConfig& cfg) {
  if (kernels.empty()) throw Error(ErrorCode::invalid_argument, "no kernel matrices to combine");
  const Eigen::Index n = y.size();
  for (const auto& K : kernels) require_same_size(K, n, "kernel matrix");
  const std::size_t M = kernels.size();

  Matrix out(n, n);
#pragma omp parallel
  {
    std::vector<double> values(M);
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        for (std::size_t m = 0; m < M; ++m) values[m] = kernels[m](i, j);
        const double mean = shifted_mean(values.data(), M);
        out(i, j) = mean + (y[i] * y[j]) * deviation(values.data(), M, mean, cfg);
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) out(j, i) = out(i, j);
  }
  return GramMatrix(std::move(out), GramProvenance::combined);
}

GramMatrix mean_kernel(std::span<const GramMatrix> kernels) {
  if (kernels.empty()) throw Error(ErrorCode::invalid_argument, "no kernel matrices to average");
  const Eigen::Index n = kernels.front().size();
  for (const auto& K : kernels) require_same_size(K, n, "kernel matrix");
  const std::size_t M = kernels.size();
  Matrix out(n, n);
#pragma omp parallel
  {
    std::vector<double> values(M);
#pragma omp for schedule(dynamic, 8)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        for (std::size_t m = 0; m < M; ++m) values[m] = kernels[m](i, j);
        out(i, j) = shifted_mean(values.data(), M);
      }
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) out(j, i) = out(i, j);
  }
  return GramMatrix(std::move(out), GramProvenance::combined);
}

Matrix combine_test_rows(std::span<const Matrix> cross_grams, const LabelDiagonal& y_train,
                         const CombinerConfig& cfg, std::optional<std::span<const int>> provisional_labels) {
  if (cross_grams.empty()) throw Error(ErrorCode::invalid_argument, "no cross-kernel matrices to combine");
  const Eigen::Index m = cross_grams.front().rows();
  const Eigen::Index n = cross_grams.front().cols();
  for (const auto& C : cross_grams) {
    if (C.rows() != m || C.cols() != n) {
      throw Error(ErrorCode::dimension_mismatch, "cross-kernel matrices differ in shape");
    }
  }
  if (n != y_train.size()) {
    throw Error(ErrorCode::dimension_mismatch, "cross-kernel columns do not match the training labels");
  }
  const bool predicted = cfg.test_eval == TestEvalMode::predicted_label;
  if (predicted) {
    if (!provisional_labels) {
      throw Error(ErrorCode::invalid_argument, "predicted_label mode needs provisional labels");
    }
    if (static_cast<Eigen::Index>(provisional_labels->size()) != m) {
      throw Error(ErrorCode::dimension_mismatch, "provisional labels do not match the number of rows");
    }
    for (const int v : *provisional_labels) {
      if (v != 1 && v != -1) throw Error(ErrorCode::invalid_argument, "provisional labels must be +1 or -1");
    }
  }

  const std::size_t M = cross_grams.size();
  Matrix out(m, n);
#pragma omp parallel
  {
    std::vector<double> values(M);
#pragma omp for schedule(static)
    for (Eigen::Index t = 0; t < m; ++t) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < M; ++k) values[k] = cross_grams[k](t, i);
        const double mean = shifted_mean(values.data(), M);
        if (predicted) {
          const int yt = (*provisional_labels)[static_cast<std::size_t>(t)];
          out(t, i) = mean + (yt * y_train[i]) * deviation(values.data(), M, mean, cfg);
        } else {
          out(t, i) = mean;
        }
      }
    }
  }
  return out;
}

}  // namespace kcomb
