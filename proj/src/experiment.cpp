#include "kcomb/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "kcomb/error.hpp"
#include "kcomb/one_class.hpp"
#include "kcomb/svm.hpp"
#include "text_util.hpp"

namespace kcomb {

using json = nlohmann::json;

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += detail::format_double(v[i]);
  }
  return out;
}

std::string format_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (kernels.empty()) throw Error(ErrorCode::invalid_argument, "kernel menu is empty");
  if (c_values.empty()) throw Error(ErrorCode::invalid_argument, "no C values");
  for (const double c : c_values) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::invalid_argument, "C values must be positive");
  }
  for (const auto& k : kernels) {
    k.spec.validate();
    if (k.spec.family == KernelFamily::precomputed) {
      throw Error(ErrorCode::invalid_argument, "experiments need closed-form kernels (got " + k.name + ")");
    }
  }
  solver.validate();
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::string menu;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (i) menu += ";";
    menu += kernels[i].name + "=" + to_string(kernels[i].spec);
  }
  return {
      {"data", data_path},
      {"kernels", menu},
      {"combiner", to_string(combiner)},
      {"C_values", join_doubles(c_values)},
      {"reference_C", detail::format_double(reference_C)},
      {"seed", std::to_string(split.master_seed)},
      {"splits", std::to_string(split.repetitions)},
      {"ratio", detail::format_double(split.train_fraction)},
      {"scaling", std::string(to_string(scaling))},
      {"psd", std::string(to_string(psd))},
      {"psd_tol", detail::format_double(psd_tol)},
      {"kkt_tol", detail::format_double(solver.kkt_tol)},
      {"max_iter", std::to_string(solver.max_iterations)},
  };
}

std::vector<NamedKernel> table1_kernels() {
  return {
      {"polynomial", KernelSpec::polynomial(2, 1.0)},
      {"gaussian", KernelSpec::gaussian(1.0)},
      {"linear", KernelSpec::linear()},
  };
}

std::vector<NamedKernel> gaussian_menu(const std::vector<double>& widths) {
  std::vector<NamedKernel> out;
  for (const double c : widths) {
    const KernelSpec spec = KernelSpec::gaussian(c);
    out.push_back({to_string(spec), spec});
  }
  return out;
}

std::vector<double> default_widths() { return {0.1, 1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

std::vector<double> default_c_sweep() { return {0.1, 1, 10, 100}; }

Stat summarize(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void MethodResult::recompute_summary() {
  std::vector<double> tr, te, sv;
  for (const auto& r : runs) {
    if (!r.complete) continue;
    tr.push_back(r.train_error);
    te.push_back(r.test_error);
    sv.push_back(r.sv_percent);
  }
  completed = te.size();
  train_error = summarize(tr);
  test_error = summarize(te);
  sv_percent = summarize(sv);
}

bool ExperimentReport::complete() const {
  return std::all_of(methods.begin(), methods.end(), [&](const MethodResult& m) { return m.completed == repetitions; });
}

const MethodResult* ExperimentReport::find(std::string_view method, double C) const {
  for (const auto& m : methods) {
    if (m.method == method && m.C == C) return &m;
  }
  return nullptr;
}

const MethodResult* ExperimentReport::best(std::string_view method) const {
  const MethodResult* best = nullptr;
  for (const auto& m : methods) {
    if (m.method != method || m.completed == 0) continue;
    if (!best || m.test_error.mean < best->test_error.mean) best = &m;
  }
  return best;
}

std::vector<std::string> ExperimentReport::method_names() const {
  std::vector<std::string> names;
  for (const auto& m : methods) {
    if (std::find(names.begin(), names.end(), m.method) == names.end()) names.push_back(m.method);
  }
  return names;
}

LabeledDataset load_dataset(const ExperimentConfig& cfg) {
  return cfg.sparse_format ? load_sparse_format(cfg.data_path, cfg.data_options.labels)
                           : load_delimited(cfg.data_path, cfg.data_options);
}

namespace {

struct Outcome {
  bool ok = false;
  Evaluation train;
  Evaluation test;
  std::string error;
};

// One repetition of the study: results[c][method], methods = menu then AV.
std::vector<std::vector<Outcome>> run_repetition(const ExperimentConfig& cfg, const LabeledDataset& data,
                                                 const Split& split) {
  const std::size_t n_methods = cfg.kernels.size() + 1;
  std::vector<std::vector<Outcome>> results(cfg.c_values.size(), std::vector<Outcome>(n_methods));

  const auto scaled = fit_apply_scaling(data.subset(split.train), data.subset(split.test), cfg.scaling);
  const LabeledDataset& train_set = scaled.train;
  const LabeledDataset& test_set = scaled.test;
  const LabelDiagonal y = train_set.labels();

  std::vector<GramMatrix> grams;
  std::vector<Matrix> crosses;
  std::vector<Matrix> train_rows;
  for (const auto& k : cfg.kernels) {
    grams.push_back(gram_matrix(k.spec, train_set.X));
    crosses.push_back(cross_gram(k.spec, train_set.X, test_set.X));
    train_rows.push_back(grams.back().entries());
  }

  const auto attempt = [](Outcome& out, auto&& fn) {
    try {
      fn();
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  };

  std::optional<GramMatrix> combined;
  std::string combine_error;
  try {
    combined = psd_repair(combine_multi(grams, y, cfg.combiner), cfg.psd, cfg.psd_tol);
  } catch (const std::exception& e) {
    combine_error = e.what();
  }
  const bool predicted = cfg.combiner.test_eval == TestEvalMode::predicted_label;
  CombinerConfig averaging = cfg.combiner;
  averaging.test_eval = TestEvalMode::average_fallback;

  for (std::size_t ci = 0; ci < cfg.c_values.size(); ++ci) {
    const double C = cfg.c_values[ci];
    for (std::size_t m = 0; m < cfg.kernels.size(); ++m) {
      Outcome& out = results[ci][m];
      attempt(out, [&] {
        const SvmModel model = train(train_set, grams[m], C, cfg.solver, to_string(cfg.kernels[m].spec));
        out.train = evaluate(model, train_set, grams[m].entries());
        out.test = evaluate(model, test_set, crosses[m]);
      });
    }

    Outcome& av = results[ci].back();
    if (!combined) {
      av.error = combine_error;
      continue;
    }
    attempt(av, [&] {
      const SvmModel model = train(train_set, *combined, C, cfg.solver, "combined");
      // Neither set is treated as labeled when forming its rows.
      std::optional<std::vector<int>> train_guess;
      std::optional<std::vector<int>> test_guess;
      if (predicted) {
        const GramMatrix mean = mean_kernel(grams);
        const SvmModel provisional = train(train_set, mean, C, cfg.solver, "mean");
        train_guess = predict_rows(provisional, mean.entries());
        test_guess = predict_rows(provisional, combine_test_rows(crosses, y, averaging));
      }
      const auto span_of = [](const std::optional<std::vector<int>>& v) -> std::optional<std::span<const int>> {
        if (!v) return std::nullopt;
        return std::span<const int>(*v);
      };
      const Matrix tr_rows = combine_test_rows(train_rows, y, cfg.combiner, span_of(train_guess));
      const Matrix te_rows = combine_test_rows(crosses, y, cfg.combiner, span_of(test_guess));
      av.train = evaluate(model, train_set, tr_rows);
      av.test = evaluate(model, test_set, te_rows);
    });
  }
  return results;
}

}  // namespace

ExperimentReport run_kernel_study(const std::string& name, const ExperimentConfig& cfg, const LabeledDataset& data) {
  cfg.validate();
  if (!data.has_both_classes()) throw Error(ErrorCode::invalid_argument, "dataset holds a single class");
  const auto start = std::chrono::steady_clock::now();
  const auto splits = make_splits(static_cast<std::size_t>(data.size()), cfg.split);
  const std::size_t reps = splits.size();
  const std::size_t n_methods = cfg.kernels.size() + 1;

  std::vector<std::vector<std::vector<Outcome>>> per_rep(reps);
  std::vector<std::string> rep_error(reps);

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < reps; ++r) {
    try {
      per_rep[r] = run_repetition(cfg, data, splits[r]);
    } catch (const std::exception& e) {
      rep_error[r] = e.what();
    }
  }

  ExperimentReport report;
  report.experiment = name;
  report.config = cfg.echo();
  report.seed = cfg.split.master_seed;
  report.repetitions = reps;
  report.reference_C = cfg.reference_C;

  for (std::size_t m = 0; m < n_methods; ++m) {
    for (std::size_t ci = 0; ci < cfg.c_values.size(); ++ci) {
      MethodResult mr;
      const bool is_av = m == cfg.kernels.size();
      mr.method = is_av ? std::string(kCombinedMethod) : cfg.kernels[m].name;
      mr.kernel = is_av ? to_string(cfg.combiner) : to_string(cfg.kernels[m].spec);
      mr.C = cfg.c_values[ci];
      for (std::size_t r = 0; r < reps; ++r) {
        RunRecord rec;
        rec.repetition = r;
        if (!rep_error[r].empty()) {
          rec.error = rep_error[r];
        } else {
          const Outcome& o = per_rep[r][ci][m];
          rec.complete = o.ok;
          rec.error = o.error;
          if (o.ok) {
            rec.train_error = o.train.error_percent;
            rec.test_error = o.test.error_percent;
            rec.sv_percent = o.test.sv_percent;
          }
        }
        if (!rec.complete) {
          std::cerr << "[kcomb] " << name << ": repetition " << r << ", " << mr.method << " (C=" << mr.C
                    << ") incomplete: " << rec.error << '\n';
        }
        mr.runs.push_back(std::move(rec));
      }
      mr.recompute_summary();
      report.methods.push_back(std::move(mr));
    }
  }
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

ExperimentConfig with_reference_c(ExperimentConfig cfg) {
  if (std::find(cfg.c_values.begin(), cfg.c_values.end(), cfg.reference_C) == cfg.c_values.end()) {
    cfg.c_values.push_back(cfg.reference_C);
  }
  return cfg;
}

}  // namespace

ExperimentReport run_table1(const ExperimentConfig& cfg, const LabeledDataset& data) {
  ExperimentConfig c = with_reference_c(cfg);
  if (c.kernels.empty()) c.kernels = table1_kernels();
  return run_kernel_study("table1", c, data);
}

ExperimentReport run_table1(const ExperimentConfig& cfg) { return run_table1(cfg, load_dataset(cfg)); }

ExperimentReport run_param_select(const ExperimentConfig& cfg, const LabeledDataset& data) {
  ExperimentConfig c = with_reference_c(cfg);
  if (c.kernels.empty()) c.kernels = gaussian_menu(default_widths());
  return run_kernel_study("paramselect", c, data);
}

ExperimentReport run_param_select(const ExperimentConfig& cfg) { return run_param_select(cfg, load_dataset(cfg)); }

void check_aggregates(const ExperimentReport& report) {
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  for (const auto& m : report.methods) {
    MethodResult fresh = m;
    fresh.recompute_summary();
    if (fresh.completed != m.completed || !close(m.train_error.mean, fresh.train_error.mean) ||
        !close(m.train_error.sd, fresh.train_error.sd) || !close(m.test_error.mean, fresh.test_error.mean) ||
        !close(m.test_error.sd, fresh.test_error.sd) || !close(m.sv_percent.mean, fresh.sv_percent.mean) ||
        !close(m.sv_percent.sd, fresh.sv_percent.sd)) {
      throw Error(ErrorCode::numerical, "aggregates of " + m.method + " (C=" + detail::format_double(m.C) +
                                            ") do not match its runs");
    }
  }
}

namespace {

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

Stat stat_from(const json& j) { return {j.at("mean").get<double>(), j.at("sd").get<double>()}; }

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  check_aggregates(report);
  json methods = json::array();
  for (const auto& m : report.methods) {
    json runs = json::array();
    for (const auto& r : m.runs) {
      runs.push_back({{"repetition", r.repetition},
                      {"complete", r.complete},
                      {"train_error", r.train_error},
                      {"test_error", r.test_error},
                      {"sv_percent", r.sv_percent},
                      {"error", r.error}});
    }
    methods.push_back({{"method", m.method},
                       {"kernel", m.kernel},
                       {"C", m.C},
                       {"completed", m.completed},
                       {"train_error", stat_json(m.train_error)},
                       {"test_error", stat_json(m.test_error)},
                       {"sv_percent", stat_json(m.sv_percent)},
                       {"runs", runs}});
  }
  json best = json::object();
  for (const auto& name : report.method_names()) {
    if (const MethodResult* b = report.best(name)) best[name] = b->C;
  }
  const json doc = {{"format", "kcomb-report"},
                    {"version", 1},
                    {"experiment", report.experiment},
                    {"config", report.config},
                    {"seed", report.seed},
                    {"repetitions", report.repetitions},
                    {"reference_C", report.reference_C},
                    {"complete", report.complete()},
                    {"best_C", best},
                    {"methods", methods}};
  return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("report JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "kcomb-report" || doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::parse_error, "not a version 1 kcomb report");
    }
    ExperimentReport r;
    r.experiment = doc.at("experiment").get<std::string>();
    r.config = doc.at("config").get<std::map<std::string, std::string>>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.repetitions = doc.at("repetitions").get<std::size_t>();
    r.reference_C = doc.at("reference_C").get<double>();
    for (const auto& jm : doc.at("methods")) {
      MethodResult m;
      m.method = jm.at("method").get<std::string>();
      m.kernel = jm.at("kernel").get<std::string>();
      m.C = jm.at("C").get<double>();
      m.completed = jm.at("completed").get<std::size_t>();
      m.train_error = stat_from(jm.at("train_error"));
      m.test_error = stat_from(jm.at("test_error"));
      m.sv_percent = stat_from(jm.at("sv_percent"));
      for (const auto& jr : jm.at("runs")) {
        RunRecord rec;
        rec.repetition = jr.at("repetition").get<std::size_t>();
        rec.complete = jr.at("complete").get<bool>();
        rec.train_error = jr.at("train_error").get<double>();
        rec.test_error = jr.at("test_error").get<double>();
        rec.sv_percent = jr.at("sv_percent").get<double>();
        rec.error = jr.at("error").get<std::string>();
        m.runs.push_back(std::move(rec));
      }
      r.methods.push_back(std::move(m));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("report JSON: ") + e.what());
  }
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method,kernel,C,repetition,complete,train_error,test_error,sv_percent\n";
  for (const auto& m : report.methods) {
    for (const auto& r : m.runs) {
      out << m.method << ",\"" << m.kernel << "\"," << detail::format_double(m.C) << ',' << r.repetition << ','
          << (r.complete ? 1 : 0) << ',' << detail::format_double(r.train_error) << ','
          << detail::format_double(r.test_error) << ',' << detail::format_double(r.sv_percent) << '\n';
    }
  }
  return out.str();
}

namespace {

std::string mean_sd(const Stat& s) { return format_pct(s.mean) + " (" + format_pct(s.sd) + ")"; }

void table_row(std::ostringstream& out, const MethodResult& m, std::size_t reps, bool show_c) {
  out << "| " << m.method << " | ";
  if (show_c) out << detail::format_double(m.C) << " | ";
  out << mean_sd(m.train_error) << " | " << mean_sd(m.test_error) << " | " << mean_sd(m.sv_percent) << " | "
      << m.completed << "/" << reps << " |\n";
}

}  // namespace

std::string report_to_markdown(const ExperimentReport& report) {
  std::ostringstream out;
  out << "# " << report.experiment << "\n\n";
  out << "Percentage of misclassified points and support vectors over " << report.repetitions
      << " random partitions (seed " << report.seed << "). Mean (sample standard deviation).\n\n";
  out << "## C = " << detail::format_double(report.reference_C) << "\n\n";
  out << "| Method | Training error | Test error | % SV | Runs |\n|---|---|---|---|---|\n";
  for (const auto& name : report.method_names()) {
    if (const MethodResult* m = report.find(name, report.reference_C)) table_row(out, *m, report.repetitions, false);
  }
  out << "\n## Best C per method (lowest mean test error)\n\n";
  out << "| Method | C | Training error | Test error | % SV | Runs |\n|---|---|---|---|---|---|\n";
  for (const auto& name : report.method_names()) {
    if (const MethodResult* m = report.best(name)) table_row(out, *m, report.repetitions, true);
  }
  out << "\n## Kernels\n\n";
  for (const auto& name : report.method_names()) {
    for (const auto& m : report.methods) {
      if (m.method == name) {
        out << "- " << name << ": `" << m.kernel << "`\n";
        break;
      }
    }
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw Error(ErrorCode::io_error, "failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<std::string> emit_report(const ExperimentReport& report, const std::string& out_dir,
                                     const std::set<ReportFormat>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> written;
  const auto put = [&](const char* file, const std::string& content) {
    write_file(dir / file, content);
    written.push_back((dir / file).string());
  };
  if (formats.contains(ReportFormat::json)) put("report.json", report_to_json(report));
  if (formats.contains(ReportFormat::csv)) put("runs.csv", report_to_csv(report));
  if (formats.contains(ReportFormat::markdown)) put("table.md", report_to_markdown(report));
  put("timing.json", json{{"wall_clock_seconds", report.wall_clock_seconds}}.dump(2) + "\n");
  return written;
}

std::map<std::string, std::string> OneClassConfig::echo() const {
  return {{"data", data_path},
          {"kernel", to_string(kernel)},
          {"nu", detail::format_double(nu)},
          {"scaling", std::string(to_string(scaling))},
          {"kkt_tol", detail::format_double(solver.kkt_tol)},
          {"max_iter", std::to_string(solver.max_iterations)}};
}

OneClassReport run_oneclass(const OneClassConfig& cfg, const LabeledDataset& data) {
  if (data.size() == 0) throw Error(ErrorCode::invalid_argument, "empty dataset");
  const RowMatrix X = ScalingTransform::fit(data.X, cfg.scaling).apply(data.X);
  const GramMatrix G = gram_matrix(cfg.kernel, X);
  const OneClassModel model = train_oneclass(G, cfg.nu, cfg.solver);

  OneClassReport report;
  report.config = cfg.echo();
  report.n_points = static_cast<std::size_t>(data.size());
  report.n_support = model.support_indices.size();
  report.b_star = model.offset_b;
  // Margin points carry score - b* of order the KKT tolerance with either
  // sign; only points clearly below the threshold are flagged.
  const Vector margin = G.entries() * model.alpha - Vector::Constant(G.size(), model.offset_b);
  for (Eigen::Index i = 0; i < G.size(); ++i) {
    if (margin(i) < -cfg.solver.kkt_tol) {
      report.outliers.push_back(static_cast<std::size_t>(i));
      report.outlier_scores.push_back(margin(i));
    }
  }
  return report;
}

std::string oneclass_to_json(const OneClassReport& report) {
  const json doc = {{"format", "kcomb-oneclass"},
                    {"version", 1},
                    {"config", report.config},
                    {"n_points", report.n_points},
                    {"n_support", report.n_support},
                    {"b_star", report.b_star},
                    {"outliers", report.outliers},
                    {"outlier_scores", report.outlier_scores}};
  return doc.dump(2) + "\n";
}

std::string oneclass_to_csv(const OneClassReport& report) {
  std::ostringstream out;
  out << "index,score\n";
  for (std::size_t k = 0; k < report.outliers.size(); ++k) {
    out << report.outliers[k] << ',' << detail::format_double(report.outlier_scores[k]) << '\n';
  }
  return out.str();
}

}  // namespace kcomb
