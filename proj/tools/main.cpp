// fregls: scalar-on-function regression with correlated errors.
//
// Subcommands: fit, predict, simulate, dcor, roll. All stochastic commands
// take a mandatory --seed and write byte-identical outputs for identical
// invocations.

#include <CLI11.hpp>
#include <algorithm>
#include <optional>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fregls/bench.hpp"
#include "fregls/dcor.hpp"
#include "fregls/fgls.hpp"
#include "fregls/io.hpp"
#include "fregls/report.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using fregls::BasisFamily;
using fregls::CovarianceSpec;
using fregls::FitMethod;
using fregls::NumberFormat;
using fregls::Table;
using json = nlohmann::ordered_json;

struct OutputSink {
  std::filesystem::path dir;
  bool markdown = false;

  void write_table(const std::string& stem, const Table& table) const {
    const std::string body = markdown ? to_markdown(table) : to_csv(table);
    const std::string ext = markdown ? ".md" : ".csv";
    fregls::write_text_file((dir / (stem + ext)).string(), body);
  }

  NumberFormat number_format() const {
    return markdown ? fregls::markdown_number_format() : fregls::csv_number_format();
  }

  void write_manifest(const json& manifest) const {
    fregls::write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  }
};

OutputSink make_sink(const std::string& out_dir, const std::string& format) {
  if (format != "csv" && format != "markdown") {
    throw std::invalid_argument("format must be csv or markdown");
  }
  OutputSink sink{out_dir, format == "markdown"};
  std::filesystem::create_directories(sink.dir);
  return sink;
}

BasisFamily parse_basis(const std::string& name) {
  if (name == "fpc") return BasisFamily::Fpc;
  if (name == "bspline") return BasisFamily::BSpline;
  throw std::invalid_argument("unknown basis family: " + name);
}

CovarianceSpec parse_family(const std::string& name, double theta) {
  using fregls::CovFamily;
  switch (fregls::cov_family_from_string(name)) {
    case CovFamily::Identity: return CovarianceSpec::identity();
    case CovFamily::Ar1: return CovarianceSpec::ar1(theta);
    case CovFamily::Equicorrelated: return CovarianceSpec::equicorrelated(theta);
    default:
      throw std::invalid_argument("family '" + name + "' is not available from the CLI");
  }
}

// Expands "--config FILE" (or --config=FILE) anywhere on the command line
// into the flags spelled in the file: one key=value per line, '#' comments.
// The expansion happens in place, so config keys stay in subcommand scope.
std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config") {
      if (i + 1 >= argc) throw std::invalid_argument("--config needs a file path");
      path = argv[++i];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      args.push_back(std::move(arg));
      continue;
    }
    std::istringstream in(fregls::read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t\r");
      line = line.substr(first, last - first + 1);
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw fregls::ParseError("expected key=value in config file " + path, line_no);
      }
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
      while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) value.erase(0, 1);
      args.push_back("--" + key);
      if (!value.empty()) args.push_back(value);
    }
  }
  return args;
}

std::pair<std::string, std::string> parse_named_path(const std::string& arg) {
  const auto pos = arg.find('=');
  if (pos == std::string::npos || pos == 0 || pos + 1 == arg.size()) {
    throw std::invalid_argument("expected name=path, got '" + arg + "'");
  }
  return {arg.substr(0, pos), arg.substr(pos + 1)};
}

fregls::FunctionalSample read_curves(const std::string& path, bool long_format) {
  return long_format ? fregls::read_functional_long(path) : fregls::read_functional_wide(path);
}

// ---------------------------------------------------------------------------

struct FitArgs {
  std::string x_path, y_path;
  bool long_format = false;
  std::string basis = "fpc";
  int k_min = 0, k_max = 0, order = 4;
  std::string family = "ar1";
  std::optional<double> theta;  // pin the dependence parameter instead of estimating
  std::string out_dir = "fregls_out";
  std::string format = "csv";
};

fregls::FglsFit run_fit(const FitArgs& args) {
  const fregls::FunctionalSample x = read_curves(args.x_path, args.long_format);
  const Eigen::VectorXd y = fregls::read_scalar_csv(args.y_path);
  if (y.size() != x.n()) {
    throw std::invalid_argument("response/covariate length mismatch: " +
                                std::to_string(y.size()) + " responses vs " +
                                std::to_string(x.n()) + " curves");
  }
  fregls::SelectConfig cfg;
  cfg.family = parse_basis(args.basis);
  cfg.k_min = args.k_min > 0 ? args.k_min : (cfg.family == BasisFamily::Fpc ? 1 : 4);
  cfg.k_max = args.k_max > 0 ? args.k_max : (cfg.family == BasisFamily::Fpc ? 8 : 11);
  cfg.bspline_order = args.order;
  cfg.cov = parse_family(args.family, args.theta.value_or(0.0));
  cfg.fixed_theta = args.theta;
  return fregls::select_model(y, x, cfg);
}

int cmd_fit(const FitArgs& args) {
  const OutputSink sink = make_sink(args.out_dir, args.format);
  const fregls::FglsFit fit = run_fit(args);
  const NumberFormat fmt = sink.number_format();
  sink.write_table("fit_summary", fregls::render_fit_summary(fit, fmt));
  sink.write_table("beta_curve", fregls::render_beta_table(fit, fregls::csv_number_format()));
  return 0;
}

struct PredictArgs {
  FitArgs fit;
  std::string new_x_path;
  std::vector<int> horizons = {1};
};

int cmd_predict(const PredictArgs& args) {
  const OutputSink sink = make_sink(args.fit.out_dir, args.fit.format);
  const fregls::FglsFit fit = run_fit(args.fit);
  const fregls::FunctionalSample x_new = read_curves(args.new_x_path, args.fit.long_format);
  const fregls::Prediction pred = fregls::predict(fit, x_new, fit.cov, args.horizons);
  const NumberFormat fmt = sink.number_format();
  sink.write_table("fit_summary", fregls::render_fit_summary(fit, fmt));
  sink.write_table("predictions", fregls::render_prediction(pred, args.horizons, fmt));
  return 0;
}

struct SimulateArgs {
  std::string scenario = "a";
  std::vector<double> snrs = {0.05};
  std::vector<double> phis = {0.9};
  int n = 100;
  int replicas = 200;
  std::string basis = "fpc";
  int k_min = 0, k_max = 0, order = 4;
  std::vector<std::string> methods = {"lm", "gls", "igls"};
  std::vector<int> horizons = {1, 5, 10};
  int grid_size = 101;
  std::uint64_t seed = 0;
  std::string out_dir = "fregls_out";
  std::string format = "csv";
};

int cmd_simulate(const SimulateArgs& args) {
  const OutputSink sink = make_sink(args.out_dir, args.format);

  fregls::SimConfig tmpl;
  if (args.scenario == "a") {
    tmpl.scenario = fregls::Scenario::A;
  } else if (args.scenario == "b") {
    tmpl.scenario = fregls::Scenario::B;
  } else {
    throw std::invalid_argument("scenario must be a or b");
  }
  tmpl.n = args.n;
  tmpl.replicas = args.replicas;
  tmpl.basis = parse_basis(args.basis);
  tmpl.k_min = args.k_min;
  tmpl.k_max = args.k_max;
  tmpl.bspline_order = args.order;
  tmpl.horizons = args.horizons;
  tmpl.grid_size = args.grid_size;
  tmpl.seed = args.seed;
  tmpl.methods.clear();
  for (const auto& name : args.methods) {
    if (name == "lm") {
      tmpl.methods.push_back(FitMethod::Lm);
    } else if (name == "gls") {
      tmpl.methods.push_back(FitMethod::Gls);
    } else if (name == "igls") {
      tmpl.methods.push_back(FitMethod::Igls);
    } else {
      throw std::invalid_argument("unknown method: " + name);
    }
  }
  for (double snr : args.snrs) {
    tmpl.snr = snr;
    for (double phi : args.phis) {
      tmpl.phi = phi;
      tmpl.validate();
    }
  }
  tmpl.snr = args.snrs.front();
  tmpl.phi = args.phis.front();

  const fregls::SimSweep sweep = fregls::run_sweep(tmpl, args.snrs, args.phis);
  const NumberFormat fmt = sink.number_format();
  sink.write_table("table1_selected_k", fregls::render_selected_k(sweep, fmt));
  sink.write_table("table2_beta_mse", fregls::render_beta_mse(sweep, fmt));
  sink.write_table("table3_phi_mse", fregls::render_phi_mse(sweep, fmt));
  sink.write_table("table4_mspe", fregls::render_mspe(sweep, fmt));
  sink.write_table("replicas", fregls::render_replica_records(sweep));

  json manifest;
  manifest["tool"] = "fregls";
  manifest["version"] = kVersion;
  manifest["subcommand"] = "simulate";
  manifest["seed"] = args.seed;
  manifest["config"] = {{"scenario", args.scenario}, {"snr", args.snrs},
                        {"phi", args.phis},          {"n", args.n},
                        {"replicas", args.replicas}, {"basis", args.basis},
                        {"methods", args.methods},   {"horizons", args.horizons},
                        {"grid_size", args.grid_size}};
  int failures = 0;
  for (const auto& row : sweep.cells) {
    for (const auto& cell : row) failures += cell.failures;
  }
  manifest["failed_replicas"] = failures;
  sink.write_manifest(manifest);
  return 0;
}

struct DcorArgs {
  std::vector<std::string> functional;  // name=path
  std::vector<std::string> scalars;     // name=path
  std::vector<std::string> responses;   // name=path (scalar)
  std::vector<std::string> functional_responses;  // name=path
  std::string out_dir = "fregls_out";
  std::string format = "csv";
};

int cmd_dcor(const DcorArgs& args) {
  const OutputSink sink = make_sink(args.out_dir, args.format);
  std::vector<std::pair<std::string, fregls::DcorSample>> candidates, responses;
  for (const auto& arg : args.functional) {
    const auto [name, path] = parse_named_path(arg);
    candidates.emplace_back(name,
                            fregls::DcorSample::functional(fregls::read_functional_wide(path)));
  }
  for (const auto& arg : args.scalars) {
    const auto [name, path] = parse_named_path(arg);
    candidates.emplace_back(name, fregls::DcorSample::scalar(fregls::read_scalar_csv(path)));
  }
  for (const auto& arg : args.responses) {
    const auto [name, path] = parse_named_path(arg);
    responses.emplace_back(name, fregls::DcorSample::scalar(fregls::read_scalar_csv(path)));
  }
  for (const auto& arg : args.functional_responses) {
    const auto [name, path] = parse_named_path(arg);
    responses.emplace_back(name,
                           fregls::DcorSample::functional(fregls::read_functional_wide(path)));
  }
  if (candidates.empty()) throw std::invalid_argument("need at least one candidate sample");

  const fregls::ScreeningTable table = fregls::screening_table(candidates, responses);
  sink.write_table("screening", fregls::render_screening(table, sink.number_format()));
  return 0;
}

struct RollArgs {
  std::string response_path;
  std::vector<std::string> covariates;  // name=path
  std::vector<std::string> sets;        // "a+b"
  int n_train = 104;
  std::vector<int> horizons = {1, 2};
  int origins = 40;
  std::string family = "ar1";
  std::string basis = "fpc";
  int k_min = 1, k_max = 4, order = 4;
  std::uint64_t seed = 0;
  std::string out_dir = "fregls_out";
  std::string format = "csv";
};

int cmd_roll(const RollArgs& args) {
  const OutputSink sink = make_sink(args.out_dir, args.format);
  std::vector<std::pair<std::string, std::string>> covariate_paths;
  for (const auto& arg : args.covariates) covariate_paths.push_back(parse_named_path(arg));
  if (covariate_paths.empty()) throw std::invalid_argument("need at least one --covariate");
  const fregls::Panel panel = fregls::read_panel(args.response_path, covariate_paths);

  fregls::RollingConfig cfg;
  cfg.n_train = args.n_train;
  cfg.horizons = args.horizons;
  cfg.n_origins = args.origins;
  cfg.cov = parse_family(args.family, 0.0);
  if (cfg.cov.family == fregls::CovFamily::Identity) {
    throw std::invalid_argument("roll needs a dependence family (e.g. ar1)");
  }
  cfg.basis = parse_basis(args.basis);
  cfg.k_min = args.k_min;
  cfg.k_max = args.k_max;
  cfg.bspline_order = args.order;
  for (const auto& set : args.sets) {
    std::vector<std::string> names;
    std::string token;
    std::istringstream in(set);
    while (std::getline(in, token, '+')) {
      if (!token.empty()) names.push_back(token);
    }
    if (names.empty()) throw std::invalid_argument("empty covariate set: '" + set + "'");
    cfg.covariate_sets.push_back(std::move(names));
  }

  const fregls::RollingReport report = fregls::rolling_forecast(panel, cfg);
  sink.write_table("rolling_mspe", fregls::render_rolling(report, sink.number_format()));

  json manifest;
  manifest["tool"] = "fregls";
  manifest["version"] = kVersion;
  manifest["subcommand"] = "roll";
  manifest["seed"] = args.seed;
  manifest["config"] = {{"n_train", args.n_train}, {"horizons", args.horizons},
                        {"origins", args.origins}, {"family", args.family},
                        {"basis", args.basis},     {"sets", args.sets}};
  manifest["skipped_origins"] = report.skipped_origins;
  manifest["gaps"] = report.gap_log;
  sink.write_manifest(manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scalar-on-function regression with correlated errors"};
  app.require_subcommand(1);
  app.footer("Any subcommand accepts --config FILE with one key=value per line;\n"
             "keys are the long option names without the leading dashes.");

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit a functional regression to CSV data");
  fit->add_option("--x", fit_args.x_path, "Functional covariate CSV")->required();
  fit->add_flag("--long", fit_args.long_format, "Covariate CSV is in long (id,t,value) format");
  fit->add_option("--y", fit_args.y_path, "Scalar response CSV")->required();
  fit->add_option("--basis", fit_args.basis, "Basis family: fpc or bspline");
  fit->add_option("--k-min", fit_args.k_min, "Smallest basis dimension");
  fit->add_option("--k-max", fit_args.k_max, "Largest basis dimension");
  fit->add_option("--order", fit_args.order, "B-spline order");
  fit->add_option("--family", fit_args.family, "Error covariance family");
  fit->add_option("--theta", fit_args.theta,
                  "Fix the dependence parameter instead of estimating it");
  fit->add_option("--out", fit_args.out_dir, "Output directory");
  fit->add_option("--format", fit_args.format, "Output format: csv or markdown");

  PredictArgs predict_args;
  CLI::App* predict = app.add_subcommand("predict", "Fit and predict at new curves");
  predict->add_option("--x", predict_args.fit.x_path, "Training covariate CSV")->required();
  predict->add_flag("--long", predict_args.fit.long_format, "Curves are in long format");
  predict->add_option("--y", predict_args.fit.y_path, "Training response CSV")->required();
  predict->add_option("--new-x", predict_args.new_x_path, "New curves CSV, one per horizon")
      ->required();
  predict->add_option("--horizons", predict_args.horizons, "Forecast horizons")
      ->delimiter(',');
  predict->add_option("--basis", predict_args.fit.basis, "Basis family");
  predict->add_option("--k-min", predict_args.fit.k_min, "Smallest basis dimension");
  predict->add_option("--k-max", predict_args.fit.k_max, "Largest basis dimension");
  predict->add_option("--order", predict_args.fit.order, "B-spline order");
  predict->add_option("--family", predict_args.fit.family, "Error covariance family");
  predict->add_option("--theta", predict_args.fit.theta,
                      "Fix the dependence parameter instead of estimating it");
  predict->add_option("--out", predict_args.fit.out_dir, "Output directory");
  predict->add_option("--format", predict_args.fit.format, "Output format");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the Monte-Carlo benchmark");
  simulate->add_option("--scenario", sim_args.scenario, "Scenario: a or b");
  simulate->add_option("--snr", sim_args.snrs, "Signal-to-noise ratios")->delimiter(',');
  simulate->add_option("--phi", sim_args.phis, "AR(1) parameters")->delimiter(',');
  simulate->add_option("--n", sim_args.n, "Sample size per replica");
  simulate->add_option("--replicas", sim_args.replicas, "Number of replicas");
  simulate->add_option("--basis", sim_args.basis, "Basis family");
  simulate->add_option("--k-min", sim_args.k_min, "Smallest basis dimension (0 = default)");
  simulate->add_option("--k-max", sim_args.k_max, "Largest basis dimension (0 = default)");
  simulate->add_option("--order", sim_args.order, "B-spline order");
  simulate->add_option("--methods", sim_args.methods, "Methods: lm,gls,igls")->delimiter(',');
  simulate->add_option("--horizons", sim_args.horizons, "Forecast horizons")->delimiter(',');
  simulate->add_option("--grid-size", sim_args.grid_size, "Grid points on [0,1]");
  simulate->add_option("--seed", sim_args.seed, "Master seed")->required();
  simulate->add_option("--out", sim_args.out_dir, "Output directory");
  simulate->add_option("--format", sim_args.format, "Output format");

  DcorArgs dcor_args;
  CLI::App* dcor = app.add_subcommand("dcor", "Distance-correlation screening table");
  dcor->add_option("--functional", dcor_args.functional, "Functional candidate name=path");
  dcor->add_option("--scalar", dcor_args.scalars, "Scalar candidate name=path");
  dcor->add_option("--response", dcor_args.responses, "Scalar response name=path");
  dcor->add_option("--response-functional", dcor_args.functional_responses,
                   "Functional response name=path");
  dcor->add_option("--out", dcor_args.out_dir, "Output directory");
  dcor->add_option("--format", dcor_args.format, "Output format");

  RollArgs roll_args;
  CLI::App* roll = app.add_subcommand("roll", "Rolling-origin forecast evaluation");
  roll->add_option("--response", roll_args.response_path, "Panel response CSV")->required();
  roll->add_option("--covariate", roll_args.covariates, "Covariate panel name=path");
  roll->add_option("--set", roll_args.sets, "Covariate set, names joined by +");
  roll->add_option("--n-train", roll_args.n_train, "Training window length");
  roll->add_option("--horizons", roll_args.horizons, "Forecast horizons")->delimiter(',');
  roll->add_option("--origins", roll_args.origins, "Number of rolled origins");
  roll->add_option("--family", roll_args.family, "Error covariance family");
  roll->add_option("--basis", roll_args.basis, "Basis family");
  roll->add_option("--k-min", roll_args.k_min, "Smallest basis dimension");
  roll->add_option("--k-max", roll_args.k_max, "Largest basis dimension");
  roll->add_option("--order", roll_args.order, "B-spline order");
  roll->add_option("--seed", roll_args.seed, "Master seed")->required();
  roll->add_option("--out", roll_args.out_dir, "Output directory");
  roll->add_option("--format", roll_args.format, "Output format");

  std::vector<std::string> args;
  try {
    args = expand_config_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  }
  try {
    // CLI11 parses right to left
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (dcor->parsed()) return cmd_dcor(dcor_args);
    if (roll->parsed()) return cmd_roll(roll_args);
  } catch (const fregls::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const fregls::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
