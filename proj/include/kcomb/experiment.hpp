#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kcomb/combiner.hpp"
#include "kcomb/data.hpp"
#include "kcomb/kernel.hpp"
#include "kcomb/qp.hpp"

namespace kcomb {

struct NamedKernel {
  std::string name;
  KernelSpec spec;
};

struct ExperimentConfig {
  std::string data_path = "data/cancer.csv";
  DelimitedOptions data_options{.delimiter = ',', .header = true, .label_column = std::nullopt, .labels = {}};
  bool sparse_format = false;

  std::vector<NamedKernel> kernels;
  CombinerConfig combiner;
  std::vector<double> c_values{1.0};
  double reference_C = 1.0;
  SplitPlan split;
  ScalingMode scaling = ScalingMode::none;
  PsdRepair psd = PsdRepair::diagonal_shift;
  double psd_tol = kDefaultPsdTol;
  SolverConfig solver;

  void validate() const;
  /// Flat text echo stored in reports.
  std::map<std::string, std::string> echo() const;
};

/// Table 1 menu: (1 + x'z)^2, exp(-|x - z|^2), x'z.
std::vector<NamedKernel> table1_kernels();
/// Gaussian menu exp(-|x - z|^2 / c), one entry per width.
std::vector<NamedKernel> gaussian_menu(const std::vector<double>& widths);
std::vector<double> default_widths();
std::vector<double> default_c_sweep();

inline constexpr std::string_view kCombinedMethod = "AV";

struct RunRecord {
  std::size_t repetition = 0;
  bool complete = false;
  double train_error = 0.0;
  double test_error = 0.0;
  double sv_percent = 0.0;
  std::string error;  // why an incomplete run stopped

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample sd (n - 1); 0 for fewer than two runs

  friend bool operator==(const Stat&, const Stat&) = default;
};

Stat summarize(const std::vector<double>& values);

struct MethodResult {
  std::string method;
  std::string kernel;
  double C = 1.0;
  std::vector<RunRecord> runs;  // one per repetition, in order
  std::size_t completed = 0;
  Stat train_error;
  Stat test_error;
  Stat sv_percent;

  void recompute_summary();
  friend bool operator==(const MethodResult&, const MethodResult&) = default;
};

struct ExperimentReport {
  std::string experiment;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::size_t repetitions = 0;
  double reference_C = 1.0;
  std::vector<MethodResult> methods;  // one entry per (method, C)
  double wall_clock_seconds = 0.0;    // kept out of report.json

  bool complete() const;
  const MethodResult* find(std::string_view method, double C) const;
  /// Entry with the lowest mean test error for `method` (first C on ties).
  const MethodResult* best(std::string_view method) const;
  std::vector<std::string> method_names() const;  // first-seen order

  friend bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
    return a.experiment == b.experiment && a.config == b.config && a.seed == b.seed &&
           a.repetitions == b.repetitions && a.reference_C == b.reference_C && a.methods == b.methods;
  }
};

LabeledDataset load_dataset(const ExperimentConfig& cfg);

/// Trains every menu kernel and the combination of the whole menu for each C
/// on each repetition. Repetitions run in parallel; a failed fit marks that
/// run incomplete and is logged to stderr.
ExperimentReport run_kernel_study(const std::string& name, const ExperimentConfig& cfg, const LabeledDataset& data);

ExperimentReport run_table1(const ExperimentConfig& cfg, const LabeledDataset& data);
ExperimentReport run_table1(const ExperimentConfig& cfg);
ExperimentReport run_param_select(const ExperimentConfig& cfg, const LabeledDataset& data);
ExperimentReport run_param_select(const ExperimentConfig& cfg);

/// Throws unless every stored mean/sd matches a recomputation from the runs
/// to 1e-12.
void check_aggregates(const ExperimentReport& report);

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_markdown(const ExperimentReport& report);

enum class ReportFormat { json, csv, markdown };

/// Writes report.json, runs.csv, table.md (as requested) and timing.json
/// into `out_dir`, creating it if needed. Returns the written paths.
std::vector<std::string> emit_report(const ExperimentReport& report, const std::string& out_dir,
                                     const std::set<ReportFormat>& formats = {ReportFormat::json, ReportFormat::csv,
                                                                              ReportFormat::markdown});

struct OneClassConfig {
  std::string data_path = "data/cancer.csv";
  DelimitedOptions data_options{.delimiter = ',', .header = true, .label_column = std::nullopt, .labels = {}};
  bool sparse_format = false;
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  double nu = 0.1;
  ScalingMode scaling = ScalingMode::none;
  SolverConfig solver;

  std::map<std::string, std::string> echo() const;
};

struct OneClassReport {
  std::map<std::string, std::string> config;
  std::size_t n_points = 0;
  std::size_t n_support = 0;
  double b_star = 0.0;
  std::vector<std::size_t> outliers;  // score < b* - kkt_tol, ascending
  std::vector<double> outlier_scores;  // sum alpha k - b*, aligned with outliers
};

OneClassReport run_oneclass(const OneClassConfig& cfg, const LabeledDataset& data);
std::string oneclass_to_json(const OneClassReport& report);
std::string oneclass_to_csv(const OneClassReport& report);

}  // namespace kcomb
