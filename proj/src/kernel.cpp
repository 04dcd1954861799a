#include "kcomb/kernel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "kcomb/error.hpp"
#include "text_util.hpp"

namespace kcomb {

KernelSpec KernelSpec::linear() { return {}; }

KernelSpec KernelSpec::polynomial(int degree, double offset) {
  KernelSpec s;
  s.family = KernelFamily::polynomial;
  s.degree = degree;
  s.offset = offset;
  s.validate();
  return s;
}

KernelSpec KernelSpec::gaussian(double width_c) {
  KernelSpec s;
  s.family = KernelFamily::gaussian;
  s.width_c = width_c;
  s.validate();
  return s;
}

KernelSpec KernelSpec::precomputed(std::string path) {
  KernelSpec s;
  s.family = KernelFamily::precomputed;
  s.path = std::move(path);
  return s;
}

void KernelSpec::validate() const {
  if (family == KernelFamily::polynomial && degree < 1) {
    throw Error(ErrorCode::invalid_argument, "polynomial kernel needs degree >= 1");
  }
  if (family == KernelFamily::polynomial && !std::isfinite(offset)) {
    throw Error(ErrorCode::invalid_argument, "polynomial kernel offset must be finite");
  }
  if (family == KernelFamily::gaussian && !(width_c > 0.0 && std::isfinite(width_c))) {
    throw Error(ErrorCode::invalid_argument, "gaussian kernel needs a finite width c > 0");
  }
}

KernelSpec parse_kernel_spec(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = detail::trim(text.substr(0, colon));
  const std::string_view params =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (name == "precomputed") {
    if (params.empty()) {
      throw Error(ErrorCode::parse_error, "precomputed kernel needs a path: precomputed:<path>");
    }
    return KernelSpec::precomputed(std::string(params));
  }

  KernelSpec spec;
  if (name == "linear") {
    spec.family = KernelFamily::linear;
  } else if (name == "poly" || name == "polynomial") {
    spec.family = KernelFamily::polynomial;
  } else if (name == "gauss" || name == "gaussian") {
    spec.family = KernelFamily::gaussian;
  } else {
    throw Error(ErrorCode::parse_error, "unknown kernel family '" + std::string(name) + "'");
  }

  for (const auto& [key, value] : detail::parse_key_values(params, ',')) {
    const auto bad_key = [&] {
      return Error(ErrorCode::parse_error, "kernel '" + std::string(name) +
                                               "' does not take parameter '" + key + "'");
    };
    if (spec.family == KernelFamily::polynomial && key == "degree") {
      spec.degree = static_cast<int>(detail::parse_int(value, "degree"));
    } else if (spec.family == KernelFamily::polynomial && key == "offset") {
      spec.offset = detail::parse_double(value, "offset");
    } else if (spec.family == KernelFamily::gaussian && key == "c") {
      spec.width_c = detail::parse_double(value, "c");
    } else {
      throw bad_key();
    }
  }
  spec.validate();
  return spec;
}

std::string to_string(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::linear:
      return "linear";
    case KernelFamily::polynomial:
      return "poly:degree=" + std::to_string(spec.degree) +
             ",offset=" + detail::format_double(spec.offset);
    case KernelFamily::gaussian:
      return "gauss:c=" + detail::format_double(spec.width_c);
    case KernelFamily::precomputed:
      return "precomputed:" + spec.path;
  }
  return {};
}

namespace {

double dot(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * z[k];
  return s;
}

double squared_distance(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - z[k];
    s += d * d;
  }
  return s;
}

}  // namespace

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                "kernel arguments differ in dimension (" + std::to_string(x.size()) + " vs " +
                    std::to_string(z.size()) + ")");
  }
  switch (spec.family) {
    case KernelFamily::linear:
      return dot(x, z);
    case KernelFamily::polynomial: {
      const double base = spec.offset + dot(x, z);
      double v = base;
      for (int p = 1; p < spec.degree; ++p) v *= base;
      return v;
    }
    case KernelFamily::gaussian:
      return std::exp(-squared_distance(x, z) / spec.width_c);
    case KernelFamily::precomputed:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "a precomputed kernel has no closed form");
}

std::string_view to_string(GramProvenance p) {
  switch (p) {
    case GramProvenance::single_kernel: return "single_kernel";
    case GramProvenance::combined: return "combined";
    case GramProvenance::repaired: return "repaired";
  }
  return "unknown";
}

GramMatrix::GramMatrix(Matrix entries, GramProvenance provenance)
    : entries_(std::move(entries)), provenance_(provenance) {
  if (entries_.rows() != entries_.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "Gram matrix must be square");
  }
  const Eigen::Index n = entries_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) {
      if (entries_(i, j) != entries_(j, i)) {
        throw Error(ErrorCode::invalid_argument,
                    "Gram matrix is not symmetric at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
    }
  }
}

GramMatrix gram_matrix(const KernelSpec& spec, const RowMatrix& X) {
  if (X.rows() == 0) throw Error(ErrorCode::invalid_argument, "cannot build a Gram matrix of no points");
  spec.validate();
  if (spec.family == KernelFamily::precomputed) {
    throw Error(ErrorCode::invalid_argument, "precomputed kernels are loaded, not evaluated");
  }
  const Eigen::Index n = X.rows();
  Matrix K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      K(i, j) = eval_kernel(spec, row_span(X, i), row_span(X, j));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) K(i, j) = K(j, i);
  }
  return GramMatrix(std::move(K), GramProvenance::single_kernel);
}

Matrix cross_gram(const KernelSpec& spec, const RowMatrix& train, const RowMatrix& test) {
  if (train.cols() != test.cols()) {
    throw Error(ErrorCode::dimension_mismatch,
                "train and test points differ in dimension (" + std::to_string(train.cols()) +
                    " vs " + std::to_string(test.cols()) + ")");
  }
  spec.validate();
  if (spec.family == KernelFamily::precomputed) {
    throw Error(ErrorCode::invalid_argument, "precomputed kernels are loaded, not evaluated");
  }
  const Eigen::Index m = test.rows();
  const Eigen::Index n = train.rows();
  Matrix K(m, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index t = 0; t < m; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      K(t, i) = eval_kernel(spec, row_span(test, t), row_span(train, i));
    }
  }
  return K;
}

PsdRepair parse_psd_repair(std::string_view text) {
  if (text == "none") return PsdRepair::none;
  if (text == "shift" || text == "diagonal_shift") return PsdRepair::diagonal_shift;
  if (text == "clip" || text == "spectral_clip") return PsdRepair::spectral_clip;
  throw Error(ErrorCode::parse_error,
              "unknown psd repair mode '" + std::string(text) + "' (none|shift|clip)");
}

std::string_view to_string(PsdRepair mode) {
  switch (mode) {
    case PsdRepair::none: return "none";
    case PsdRepair::diagonal_shift: return "shift";
    case PsdRepair::spectral_clip: return "clip";
  }
  return "unknown";
}

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::numerical, "eigendecomposition of a matrix with non-finite entries");
  }
}

}  // namespace

double min_eigenvalue(const GramMatrix& G) {
  require_finite(G.entries());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G.entries(), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "symmetric eigensolver did not converge");
  }
  return eig.eigenvalues().minCoeff();
}

GramMatrix psd_repair(const GramMatrix& G, PsdRepair mode, double tol) {
  if (mode == PsdRepair::none) return G;
  require_finite(G.entries());

  if (mode == PsdRepair::diagonal_shift) {
    const double lambda_min = min_eigenvalue(G);
    if (lambda_min >= -tol) return G;
    Matrix K = G.entries();
    K.diagonal().array() += std::abs(lambda_min) + tol;
    return GramMatrix(std::move(K), GramProvenance::repaired);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(G.entries());
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::numerical, "symmetric eigensolver did not converge");
  }
  Vector lambda = eig.eigenvalues();
  if (lambda.minCoeff() >= -tol) return G;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda(k) < -tol) lambda(k) = 0.0;
  }
  const Matrix& V = eig.eigenvectors();
  Matrix K = V * lambda.asDiagonal() * V.transpose();
  // Reassembly is only symmetric up to rounding.
  for (Eigen::Index j = 0; j < K.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < K.rows(); ++i) K(i, j) = K(j, i);
  }
  return GramMatrix(std::move(K), GramProvenance::repaired);
}

GramMatrix load_gram_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open Gram matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string tok;
    while (fields >> tok) {
      row.push_back(detail::parse_double(tok, path + ":" + std::to_string(line_no)));
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw Error(ErrorCode::parse_error, "Gram matrix file '" + path + "' is empty");
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) {
      throw Error(ErrorCode::parse_error, "Gram matrix file '" + path + "' is not square");
    }
    for (Eigen::Index j = 0; j < n; ++j) K(i, j) = rows[i][j];
  }
  return GramMatrix(std::move(K), GramProvenance::single_kernel);
}

}  // namespace kcomb
