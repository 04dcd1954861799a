#include "kcomb/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "kcomb/error.hpp"
#include "text_util.hpp"

namespace kcomb {

bool LabeledDataset::has_both_classes() const {
  return std::find(y.begin(), y.end(), 1) != y.end() && std::find(y.begin(), y.end(), -1) != y.end();
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
  out.y.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(indices[k]);
    if (indices[k] >= y.size()) throw Error(ErrorCode::invalid_argument, "subset index out of range");
    out.X.row(static_cast<Eigen::Index>(k)) = X.row(i);
    out.y.push_back(y[indices[k]]);
  }
  out.feature_names = feature_names;
  out.source_id = source_id;
  return out;
}

namespace {

int map_label(std::string_view token, const LabelMap& map, const std::string& where) {
  const std::string t(detail::trim(token));
  if (std::find(map.positive.begin(), map.positive.end(), t) != map.positive.end()) return 1;
  if (std::find(map.negative.begin(), map.negative.end(), t) != map.negative.end()) return -1;
  throw Error(ErrorCode::parse_error, where + ": unknown label value '" + t + "'");
}

RowMatrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim) {
  RowMatrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = k < rows[i].size() ? rows[i][k] : 0.0;
    }
  }
  return X;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  return in;
}

}  // namespace

LabeledDataset parse_delimited(std::istream& in, const std::string& source_id, const DelimitedOptions& options) {
  LabeledDataset ds;
  ds.source_id = source_id;
  std::vector<std::vector<double>> rows;
  std::optional<std::size_t> n_cols;
  std::size_t label_col = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = options.header;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, options.delimiter);
    const std::string where = source_id + ": row " + std::to_string(line_no);
    if (!n_cols) {
      n_cols = cells.size();
      if (*n_cols < 2) throw Error(ErrorCode::parse_error, where + ": need at least one feature and a label");
      label_col = options.label_column.value_or(*n_cols - 1);
      if (label_col >= *n_cols) {
        throw Error(ErrorCode::invalid_argument, where + ": label column " + std::to_string(label_col) +
                                                     " does not exist");
      }
    } else if (cells.size() != *n_cols) {
      throw Error(ErrorCode::parse_error, where + ": expected " + std::to_string(*n_cols) + " columns, found " +
                                              std::to_string(cells.size()));
    }
    if (header_pending) {
      header_pending = false;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c != label_col) ds.feature_names.emplace_back(detail::trim(cells[c]));
      }
      continue;
    }

    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell_where = where + ", column " + std::to_string(c + 1);
      if (detail::trim(cells[c]).empty()) throw Error(ErrorCode::parse_error, cell_where + ": missing value");
      if (c == label_col) {
        ds.y.push_back(map_label(cells[c], options.labels, cell_where));
      } else {
        row.push_back(detail::parse_double(cells[c], cell_where));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, source_id + ": no data rows");
  ds.X = to_matrix(rows, *n_cols - 1);
  return ds;
}

LabeledDataset load_delimited(const std::string& path, const DelimitedOptions& options) {
  auto in = open_input(path);
  return parse_delimited(in, path, options);
}

LabeledDataset parse_sparse_format(std::istream& in, const std::string& source_id, const LabelMap& labels) {
  LabeledDataset ds;
  ds.source_id = source_id;
  std::vector<std::vector<double>> rows;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string_view content = detail::trim(std::string_view(line).substr(0, hash));
    if (content.empty()) continue;
    const std::string where = source_id + ": line " + std::to_string(line_no);

    std::istringstream tokens{std::string(content)};
    std::string tok;
    tokens >> tok;
    ds.y.push_back(map_label(tok, labels, where));

    std::map<std::size_t, double> entries;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw Error(ErrorCode::parse_error, where + ": expected idx:val, got '" + tok + "'");
      const auto idx = detail::parse_int(std::string_view(tok).substr(0, colon), where + " index");
      if (idx < 1) throw Error(ErrorCode::parse_error, where + ": feature indices start at 1");
      const double val = detail::parse_double(std::string_view(tok).substr(colon + 1), where + " value");
      if (!entries.emplace(static_cast<std::size_t>(idx), val).second) {
        throw Error(ErrorCode::parse_error, where + ": duplicate feature index " + std::to_string(idx));
      }
    }
    std::vector<double> row;
    if (!entries.empty()) {
      dim = std::max(dim, entries.rbegin()->first);
      row.assign(entries.rbegin()->first, 0.0);
      for (const auto& [idx, val] : entries) row[idx - 1] = val;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::parse_error, source_id + ": no data lines");
  ds.X = to_matrix(rows, dim);
  return ds;
}

LabeledDataset load_sparse_format(const std::string& path, const LabelMap& labels) {
  auto in = open_input(path);
  return parse_sparse_format(in, path, labels);
}

std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t repetition) {
  // splitmix64 step keyed by the repetition number
  std::uint64_t z = master_seed + (static_cast<std::uint64_t>(repetition) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<Split> make_splits(std::size_t n_points, const SplitPlan& plan) {
  if (plan.repetitions < 1) throw Error(ErrorCode::invalid_argument, "need at least one repetition");
  if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "train fraction must lie in (0, 1)");
  }
  const auto n_train = static_cast<std::size_t>(std::floor(plan.train_fraction * static_cast<double>(n_points)));
  if (n_train < 1 || n_train >= n_points) {
    throw Error(ErrorCode::invalid_argument, "train fraction " + detail::format_double(plan.train_fraction) +
                                                 " leaves an empty side for n = " + std::to_string(n_points));
  }

  std::vector<Split> splits;
  splits.reserve(plan.repetitions);
  std::vector<std::size_t> perm(n_points);
  for (std::size_t r = 0; r < plan.repetitions; ++r) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 engine(repetition_seed(plan.master_seed, r));
    for (std::size_t i = n_points - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(engine, i + 1));
      std::swap(perm[i], perm[j]);
    }
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    splits.push_back(std::move(s));
  }
  return splits;
}

ScalingMode parse_scaling_mode(std::string_view text) {
  if (text == "none") return ScalingMode::none;
  if (text == "unit" || text == "unit_interval") return ScalingMode::unit_interval;
  if (text == "zscore") return ScalingMode::zscore;
  throw Error(ErrorCode::parse_error, "unknown scaling mode '" + std::string(text) + "' (none|unit|zscore)");
}

std::string_view to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::none: return "none";
    case ScalingMode::unit_interval: return "unit";
    case ScalingMode::zscore: return "zscore";
  }
  return "unknown";
}

ScalingTransform ScalingTransform::fit(const RowMatrix& train, ScalingMode mode) {
  const Eigen::Index d = train.cols();
  ScalingTransform t;
  t.mode = mode;
  t.shift = Vector::Zero(d);
  t.scale = Vector::Ones(d);
  if (mode == ScalingMode::none || train.rows() == 0) return t;

  for (Eigen::Index k = 0; k < d; ++k) {
    const auto col = train.col(k);
    if (mode == ScalingMode::unit_interval) {
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      t.shift(k) = lo;
      // a constant feature maps to 0
      t.scale(k) = hi > lo ? hi - lo : 1.0;
    } else {
      const double mean = col.mean();
      const double var = (col.array() - mean).square().mean();
      t.shift(k) = mean;
      t.scale(k) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }
  return t;
}

RowMatrix ScalingTransform::apply(const RowMatrix& X) const {
  if (mode == ScalingMode::none) return X;
  if (X.cols() != shift.size()) throw Error(ErrorCode::dimension_mismatch, "scaling fitted on a different dimension");
  RowMatrix out(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) out(i, k) = (X(i, k) - shift(k)) / scale(k);
  }
  return out;
}

ScaledPair fit_apply_scaling(const LabeledDataset& train, const LabeledDataset& test, ScalingMode mode) {
  if (test.size() > 0 && train.dim() != test.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "train and test differ in dimension");
  }
  ScaledPair out{train, test, ScalingTransform::fit(train.X, mode)};
  out.train.X = out.transform.apply(train.X);
  if (test.size() > 0) out.test.X = out.transform.apply(test.X);
  return out;
}

}  // namespace kcomb
