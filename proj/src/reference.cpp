#include "kcomb/reference.hpp"

#include "kcomb/error.hpp"

namespace kcomb::reference {

Matrix gram_matrix_serial(const KernelSpec& spec, const RowMatrix& X) {
  if (X.rows() == 0) throw Error(ErrorCode::invalid_argument, "cannot build a Gram matrix of no points");
  const Eigen::Index n = X.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = eval_kernel(spec, row_span(X, i), row_span(X, j));
  }
  return K;
}

Matrix cross_gram_serial(const KernelSpec& spec, const RowMatrix& train, const RowMatrix& test) {
  Matrix K(test.rows(), train.rows());
  for (Eigen::Index t = 0; t < test.rows(); ++t) {
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      K(t, i) = eval_kernel(spec, row_span(test, t), row_span(train, i));
    }
  }
  return K;
}

Matrix combine_multi_serial(std::span<const GramMatrix> kernels, const LabelDiagonal& y,
                            const CombinerConfig& cfg) {
  if (kernels.empty()) throw Error(ErrorCode::invalid_argument, "no kernel matrices to combine");
  const Eigen::Index n = y.size();
  const auto M = static_cast<double>(kernels.size());

  Matrix mean = Matrix::Zero(n, n);
  for (const auto& K : kernels) mean += K.entries();
  mean /= M;

  Matrix dev = Matrix::Zero(n, n);
  if (cfg.g_function == GFunction::abs) {
    for (const auto& K : kernels) dev.array() += (K.entries() - mean).array().abs();
  } else {
    for (std::size_t a = 0; a < kernels.size(); ++a) {
      for (std::size_t b = a + 1; b < kernels.size(); ++b) {
        Eigen::ArrayXXd gap = (kernels[a].entries() - kernels[b].entries()).array().abs();
        if (cfg.g_function == GFunction::threshold) gap = (gap > cfg.threshold).select(gap, 0.0);
        dev.array() += 0.5 * gap;
      }
    }
  }

  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[i];
  return mean + (yv * yv.transpose()).cwiseProduct(dev);
}

}  // namespace kcomb::reference
