#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace kcomb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Feature matrices store one point per row, contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
  return {m.row(i).data(), static_cast<std::size_t>(m.cols())};
}

enum class KernelFamily { linear, polynomial, gaussian, precomputed };

/// Declarative kernel description.
///
/// Text form: `linear`, `poly:degree=2,offset=1`, `gauss:c=1`,
/// `precomputed:<path>`. The gaussian is exp(-|x-z|^2 / c).
struct KernelSpec {
  KernelFamily family = KernelFamily::linear;
  int degree = 2;        // polynomial
  double offset = 1.0;   // polynomial
  double width_c = 1.0;  // gaussian
  std::string path;      // precomputed

  static KernelSpec linear();
  static KernelSpec polynomial(int degree, double offset);
  static KernelSpec gaussian(double width_c);
  static KernelSpec precomputed(std::string path);

  void validate() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

KernelSpec parse_kernel_spec(std::string_view text);
std::string to_string(const KernelSpec& spec);

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

enum class GramProvenance { single_kernel, combined, repaired };

std::string_view to_string(GramProvenance p);

/// Symmetric matrix of kernel evaluations. Immutable once built; the
/// constructor rejects anything that is not square and exactly symmetric.
class GramMatrix {
 public:
  GramMatrix(Matrix entries, GramProvenance provenance);

  Eigen::Index size() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  GramProvenance provenance() const { return provenance_; }

 private:
  Matrix entries_;
  GramProvenance provenance_;
};

// Row-parallel (OpenMP). Only the upper triangle is evaluated; the lower one
// is mirrored. Serial counterparts live in kcomb::reference.
GramMatrix gram_matrix(const KernelSpec& spec, const RowMatrix& X);

// Entry (t, i) is k(test_t, train_i).
Matrix cross_gram(const KernelSpec& spec, const RowMatrix& train, const RowMatrix& test);

enum class PsdRepair { none, diagonal_shift, spectral_clip };

PsdRepair parse_psd_repair(std::string_view text);
std::string_view to_string(PsdRepair mode);

inline constexpr double kDefaultPsdTol = 1e-10;

double min_eigenvalue(const GramMatrix& G);

/// diagonal_shift adds (|lambda_min| + tol) to the diagonal when
/// lambda_min < -tol. spectral_clip zeroes every eigenvalue below -tol and
/// reassembles. Unmodified input keeps its provenance.
GramMatrix psd_repair(const GramMatrix& G, PsdRepair mode, double tol = kDefaultPsdTol);

/// Reads a whitespace-separated square matrix, one row per line.
GramMatrix load_gram_matrix(const std::string& path);

}  // namespace kcomb
