#include "kcomb/svm.hpp"

#include <cmath>
#include <sstream>

#include "kcomb/error.hpp"
#include "text_util.hpp"

namespace kcomb {

bool SvmModel::is_margin_support(std::size_t k) const {
  const double a = std::abs(alpha_y.at(k));
  return a > support_eps() && a < C - support_eps();
}

SvmModel train(const LabeledDataset& data, const GramMatrix& G, double C, const SolverConfig& cfg,
               const std::string& kernel) {
  if (G.size() != data.size()) {
    throw Error(ErrorCode::dimension_mismatch, "Gram matrix was not built over this training set");
  }
  if (!data.has_both_classes()) {
    throw Error(ErrorCode::invalid_argument, "training data holds a single class");
  }
  const DualSolution sol = solve_csvm_dual(G, data.labels(), C, cfg);
  if (!sol.converged) {
    throw Error(ErrorCode::not_converged,
                "SMO stopped after " + std::to_string(sol.iterations) + " iterations with KKT gap " +
                    detail::format_double(sol.kkt_residual));
  }

  SvmModel model;
  model.C = C;
  model.offset_b = sol.offset_b;
  model.n_train = static_cast<std::size_t>(data.size());
  model.kernel = kernel;
  const double eps = model.support_eps();
  for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
    if (sol.alpha(i) > eps) {
      model.support_indices.push_back(static_cast<std::size_t>(i));
      model.alpha_y.push_back(sol.alpha(i) * data.y[static_cast<std::size_t>(i)]);
    }
  }
  model.support_points.resize(static_cast<Eigen::Index>(model.support_indices.size()), data.dim());
  for (std::size_t k = 0; k < model.support_indices.size(); ++k) {
    model.support_points.row(static_cast<Eigen::Index>(k)) =
        data.X.row(static_cast<Eigen::Index>(model.support_indices[k]));
  }
  return model;
}

double decision_value(const SvmModel& model, std::span<const double> k_row) {
  if (k_row.size() != model.alpha_y.size()) {
    throw Error(ErrorCode::dimension_mismatch, "kernel row has " + std::to_string(k_row.size()) +
                                                   " entries for " + std::to_string(model.alpha_y.size()) +
                                                   " support vectors");
  }
  double f = model.offset_b;
  for (std::size_t k = 0; k < k_row.size(); ++k) f += model.alpha_y[k] * k_row[k];
  return f;
}

int predict_from_value(double value) { return value >= 0.0 ? 1 : -1; }

int predict(const SvmModel& model, std::span<const double> k_row) {
  return predict_from_value(decision_value(model, k_row));
}

Vector decision_values(const SvmModel& model, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.n_train) {
    throw Error(ErrorCode::dimension_mismatch, "kernel rows have " + std::to_string(rows.cols()) +
                                                   " columns for " + std::to_string(model.n_train) +
                                                   " training points");
  }
  Vector out(rows.rows());
  std::vector<double> k_row(model.support_count());
  for (Eigen::Index t = 0; t < rows.rows(); ++t) {
    for (std::size_t k = 0; k < k_row.size(); ++k) {
      k_row[k] = rows(t, static_cast<Eigen::Index>(model.support_indices[k]));
    }
    out(t) = decision_value(model, k_row);
  }
  return out;
}

std::vector<int> predict_rows(const SvmModel& model, const Matrix& rows) {
  const Vector f = decision_values(model, rows);
  std::vector<int> out(static_cast<std::size_t>(f.size()));
  for (Eigen::Index t = 0; t < f.size(); ++t) out[static_cast<std::size_t>(t)] = predict_from_value(f(t));
  return out;
}

double decision_value_at(const SvmModel& model, const KernelSpec& spec, std::span<const double> x) {
  if (model.support_points.rows() != static_cast<Eigen::Index>(model.support_count())) {
    throw Error(ErrorCode::invalid_argument, "model does not carry its support points");
  }
  std::vector<double> k_row(model.support_count());
  for (std::size_t k = 0; k < k_row.size(); ++k) {
    k_row[k] = eval_kernel(spec, row_span(model.support_points, static_cast<Eigen::Index>(k)), x);
  }
  return decision_value(model, k_row);
}

Evaluation evaluate(const SvmModel& model, const LabeledDataset& test, const Matrix& test_rows) {
  if (test.size() == 0) throw Error(ErrorCode::invalid_argument, "cannot evaluate on an empty test set");
  if (test_rows.rows() != test.size()) {
    throw Error(ErrorCode::dimension_mismatch, "kernel rows are not aligned with the test set");
  }
  const std::vector<int> pred = predict_rows(model, test_rows);
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) wrong += pred[t] != test.y[t] ? 1 : 0;
  Evaluation e;
  e.error_percent = 100.0 * static_cast<double>(wrong) / static_cast<double>(test.size());
  e.sv_percent = model.n_train == 0
                     ? 0.0
                     : 100.0 * static_cast<double>(model.support_count()) / static_cast<double>(model.n_train);
  return e;
}

namespace {

constexpr const char* kModelMagic = "kcomb-svm-model";
constexpr int kModelVersion = 1;

std::string expect_key(std::istream& in, const char* key) {
  std::string k;
  if (!(in >> k) || k != key) {
    throw Error(ErrorCode::parse_error, std::string("model file: expected '") + key + "', got '" + k + "'");
  }
  std::string rest;
  std::getline(in, rest);
  return std::string(detail::trim(rest));
}

}  // namespace

void save_model(const SvmModel& model, std::ostream& out) {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "kernel " << model.kernel << '\n';
  out << "C " << detail::format_double(model.C) << '\n';
  out << "offset_b " << detail::format_double(model.offset_b) << '\n';
  out << "n_train " << model.n_train << '\n';
  out << "dim " << model.support_points.cols() << '\n';
  out << "n_support " << model.support_count() << '\n';
  for (std::size_t k = 0; k < model.support_count(); ++k) {
    out << model.support_indices[k] << ' ' << detail::format_double(model.alpha_y[k]);
    for (Eigen::Index c = 0; c < model.support_points.cols(); ++c) {
      out << ' ' << detail::format_double(model.support_points(static_cast<Eigen::Index>(k), c));
    }
    out << '\n';
  }
}

SvmModel load_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic) {
    throw Error(ErrorCode::parse_error, "not a kcomb SVM model");
  }
  if (version != kModelVersion) {
    throw Error(ErrorCode::parse_error, "unsupported model version " + std::to_string(version));
  }
  SvmModel m;
  m.kernel = expect_key(in, "kernel");
  m.C = detail::parse_double(expect_key(in, "C"), "model C");
  m.offset_b = detail::parse_double(expect_key(in, "offset_b"), "model offset_b");
  m.n_train = static_cast<std::size_t>(detail::parse_int(expect_key(in, "n_train"), "model n_train"));
  const auto dim = detail::parse_int(expect_key(in, "dim"), "model dim");
  const auto n_sv = detail::parse_int(expect_key(in, "n_support"), "model n_support");
  if (dim < 0 || n_sv < 0) throw Error(ErrorCode::parse_error, "model sizes must be non-negative");
  m.support_points.resize(n_sv, dim);
  for (std::int64_t k = 0; k < n_sv; ++k) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "model file truncated");
    std::istringstream fields(line);
    std::string tok;
    std::vector<std::string> toks;
    while (fields >> tok) toks.push_back(tok);
    if (static_cast<std::int64_t>(toks.size()) != 2 + dim) {
      throw Error(ErrorCode::parse_error, "model support line " + std::to_string(k + 1) + " is malformed");
    }
    m.support_indices.push_back(static_cast<std::size_t>(detail::parse_int(toks[0], "support index")));
    m.alpha_y.push_back(detail::parse_double(toks[1], "alpha_y"));
    for (std::int64_t c = 0; c < dim; ++c) {
      m.support_points(k, c) = detail::parse_double(toks[static_cast<std::size_t>(2 + c)], "support point");
    }
  }
  return m;
}

}  // namespace kcomb
