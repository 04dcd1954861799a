// bench: reproduction harness for the kernel-combination experiments.
//
//   bench table1      --data data/cancer.csv --seed 42 --splits 10 --ratio 0.7 --out out/table1
//   bench paramselect --widths 0.1,1,10,20 --out out/paramselect
//   bench oneclass    --nu 0.1 --kernel gauss:c=1 [--out out/oneclass]
//
// Exit code 0 on success. On failure a single JSON object
// {"error": {"code": ..., "message": ...}} is printed to stderr.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kcomb/error.hpp"
#include "kcomb/experiment.hpp"

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw kcomb::Error(kcomb::ErrorCode::parse_error, std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw kcomb::Error(kcomb::ErrorCode::parse_error, std::string(what) + " is empty");
  return out;
}

struct DataArgs {
  std::string path = "data/cancer.csv";
  std::string format = "auto";
  char delimiter = ',';
  bool header = true;
  std::string scaling = "none";

  void add(CLI::App* app) {
    app->add_option("--data", path, "Dataset path")->capture_default_str();
    app->add_option("--format", format, "Dataset format")
        ->check(CLI::IsMember({"auto", "delimited", "sparse"}))
        ->capture_default_str();
    app->add_option("--delimiter", delimiter, "Field delimiter for delimited files")->capture_default_str();
    app->add_flag("--header,!--no-header", header, "Delimited file starts with a header row");
    app->add_option("--scaling", scaling, "Feature scaling fitted on training data")
        ->check(CLI::IsMember({"none", "unit", "zscore"}))
        ->capture_default_str();
  }

  bool sparse() const {
    if (format == "auto") return !(path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0);
    return format == "sparse";
  }
};

struct SolverArgs {
  double kkt_tol = 1e-3;
  std::size_t max_iter = 10'000'000;

  void add(CLI::App* app) {
    app->add_option("--kkt-tol", kkt_tol, "KKT stopping tolerance")->capture_default_str();
    app->add_option("--max-iter", max_iter, "SMO pair-step limit")->capture_default_str();
  }
  kcomb::SolverConfig config() const {
    kcomb::SolverConfig cfg;
    cfg.kkt_tol = kkt_tol;
    cfg.max_iterations = max_iter;
    return cfg;
  }
};

struct StudyArgs {
  DataArgs data;
  SolverArgs solver;
  std::uint64_t seed = 42;
  std::size_t splits = 10;
  double ratio = 0.7;
  double C = 1.0;
  std::string c_sweep;
  std::string psd = "shift";
  std::string test_eval = "pred";
  std::string combine = "av";
  std::string out = "out";
  std::string widths;

  void add(CLI::App* app, const std::string& default_sweep) {
    c_sweep = default_sweep;
    data.add(app);
    solver.add(app);
    app->add_option("--seed", seed, "Master seed for the partitions")->capture_default_str();
    app->add_option("--splits", splits, "Number of random partitions")->capture_default_str();
    app->add_option("--ratio", ratio, "Training fraction")->capture_default_str();
    app->add_option("--C", C, "Reference C (always included in the sweep)")->capture_default_str();
    app->add_option("--C-sweep", c_sweep, "Comma-separated C values")->capture_default_str();
    app->add_option("--psd", psd, "PSD repair for the combined matrix")
        ->check(CLI::IsMember({"none", "shift", "clip"}))
        ->capture_default_str();
    app->add_option("--test-eval", test_eval, "Combined rows for unlabeled points")
        ->check(CLI::IsMember({"avg", "pred"}))
        ->capture_default_str();
    app->add_option("--combine", combine, "Combination rule: av, half_abs or threshold:<t>")->capture_default_str();
    app->add_option("--out", out, "Output directory")->capture_default_str();
  }

  kcomb::ExperimentConfig config() const {
    kcomb::ExperimentConfig cfg;
    cfg.data_path = data.path;
    cfg.sparse_format = data.sparse();
    cfg.data_options.delimiter = data.delimiter;
    cfg.data_options.header = data.header;
    cfg.scaling = kcomb::parse_scaling_mode(data.scaling);
    cfg.solver = solver.config();
    cfg.split = {seed, splits, ratio};
    cfg.reference_C = C;
    cfg.c_values = parse_list(c_sweep, "--C-sweep");
    cfg.psd = kcomb::parse_psd_repair(psd);
    cfg.combiner = kcomb::parse_combiner_config("combine=" + combine + ",test_eval=" + test_eval);
    return cfg;
  }
};

void print_summary(const kcomb::ExperimentReport& report, const std::vector<std::string>& written) {
  std::cout << kcomb::report_to_markdown(report);
  for (const auto& path : written) std::cout << "wrote " << path << '\n';
}

int fail(kcomb::ErrorCode code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"code", std::string(kcomb::to_string(code))}, {"message", message}}}}.dump()
            << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-combination SVM experiments"};
  app.require_subcommand(1);

  StudyArgs t1;
  auto* table1 = app.add_subcommand("table1", "Polynomial, gaussian, linear and combined kernels on repeated splits");
  t1.add(table1, "0.1,1,10,100");

  StudyArgs ps;
  auto* paramselect = app.add_subcommand("paramselect", "Gaussian widths and their combination on repeated splits");
  ps.add(paramselect, "1");
  ps.widths = "0.1,1,10,20,30,40,50,60,70,80,90,100";
  paramselect->add_option("--widths", ps.widths, "Comma-separated gaussian widths c")->capture_default_str();

  DataArgs oc_data;
  SolverArgs oc_solver;
  double nu = 0.1;
  std::string oc_kernel = "gauss:c=1";
  std::string oc_out;
  auto* oneclass = app.add_subcommand("oneclass", "Flag outliers with a one-class SVM (CSV of indices)");
  oc_data.add(oneclass);
  oc_solver.add(oneclass);
  oneclass->add_option("--nu", nu, "Outlier fraction bound nu in (0, 1]")->required();
  oneclass->add_option("--kernel", oc_kernel, "Kernel spec")->capture_default_str();
  oneclass->add_option("--out", oc_out, "Output directory (default: CSV to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << nlohmann::json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  }

  try {
    if (*table1) {
      const kcomb::ExperimentConfig cfg = t1.config();
      const auto report = kcomb::run_table1(cfg);
      print_summary(report, kcomb::emit_report(report, t1.out));
      return report.complete() ? 0 : 3;
    }
    if (*paramselect) {
      kcomb::ExperimentConfig cfg = ps.config();
      cfg.kernels = kcomb::gaussian_menu(parse_list(ps.widths, "--widths"));
      const auto report = kcomb::run_param_select(cfg);
      print_summary(report, kcomb::emit_report(report, ps.out));
      return report.complete() ? 0 : 3;
    }
    kcomb::OneClassConfig cfg;
    cfg.data_path = oc_data.path;
    cfg.sparse_format = oc_data.sparse();
    cfg.data_options.delimiter = oc_data.delimiter;
    cfg.data_options.header = oc_data.header;
    cfg.scaling = kcomb::parse_scaling_mode(oc_data.scaling);
    cfg.kernel = kcomb::parse_kernel_spec(oc_kernel);
    cfg.nu = nu;
    cfg.solver = oc_solver.config();
    const auto data = cfg.sparse_format ? kcomb::load_sparse_format(cfg.data_path, cfg.data_options.labels)
                                        : kcomb::load_delimited(cfg.data_path, cfg.data_options);
    const auto report = kcomb::run_oneclass(cfg, data);
    if (oc_out.empty()) {
      std::cout << kcomb::oneclass_to_csv(report);
      return 0;
    }
    std::filesystem::create_directories(oc_out);
    std::ofstream(std::filesystem::path(oc_out) / "outliers.csv", std::ios::binary) << kcomb::oneclass_to_csv(report);
    std::ofstream(std::filesystem::path(oc_out) / "oneclass.json", std::ios::binary) << kcomb::oneclass_to_json(report);
    std::cout << report.outliers.size() << " of " << report.n_points << " points flagged; wrote " << oc_out << '\n';
    return 0;
  } catch (const kcomb::Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(kcomb::ErrorCode::io_error, e.what());
  }
}
