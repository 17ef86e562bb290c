// Command-line frontend: simulation, fitting, regularization paths, table
// reproduction, and parameter conversions. Exit codes: 0 success, 1
// runtime/numeric failure, 2 usage/config error. stdout carries
// machine-readable summaries; diagnostics go to stderr.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hrsm/bench.hpp"
#include "hrsm/io.hpp"
#include "hrsm/model.hpp"
#include "hrsm/simulate.hpp"
#include "hrsm/solver.hpp"

namespace {

bool g_verbose = false;

void log_verbose(const std::string& message) {
  if (g_verbose) std::cerr << "[hrsm] " << message << '\n';
}

bool ends_with(const std::string& text, const std::string& suffix) {
  return text.size() >= suffix.size() &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

hrsm::Matrixd read_matrix_any(const std::string& path) {
  return ends_with(path, ".json") ? hrsm::read_matrix_json(path) : hrsm::read_matrix_csv(path);
}

void write_matrix_any(const std::string& path, const hrsm::Matrixd& matrix) {
  if (ends_with(path, ".json")) {
    hrsm::write_matrix_json(path, matrix);
  } else {
    hrsm::write_matrix_csv(path, matrix);
  }
}

struct SimulateArgs {
  hrsm::Index d = 0;
  hrsm::Index n = 0;
  std::string design = "pareto";
  double quantile = 0.95;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  hrsm::SplitMix64 rng(args.seed);
  const hrsm::Matrixd gamma = hrsm::brownian_variogram(args.d);
  hrsm::ExceedanceBatch batch;
  if (args.design == "pareto") {
    batch = hrsm::sample_hr_pareto(gamma, args.n, rng);
  } else {
    batch = hrsm::threshold_exceedances(hrsm::sample_max_stable(gamma, args.n, rng),
                                        args.quantile);
  }
  hrsm::write_matrix_csv(args.out, batch.samples);
  nlohmann::json manifest = {
      {"d", args.d},         {"n", batch.n_raw},
      {"n_u", batch.n_u()},  {"seed", args.seed},
      {"source", hrsm::to_string(batch.source)}, {"gamma_design", "brownian"},
  };
  if (batch.source == hrsm::SampleSource::max_stable_thresholded) {
    manifest["quantile"] = args.quantile;
  } else {
    manifest["quantile"] = nullptr;
  }
  hrsm::write_json_file(args.out + ".manifest.json", manifest);
  log_verbose("wrote " + std::to_string(batch.n_u()) + " exceedance rows to " + args.out);
  std::cout << "n_u=" << batch.n_u() << '\n';
  return 0;
}

struct FitArgs {
  std::string data;
  double r = 0.0;
  double tol = 1e-11;
  int max_sweeps = 10000;
  std::string out;
};

// Bad data contents (unparseable or non-positive cells) are runtime
// failures (exit 1), not usage errors.
hrsm::SufficientStats load_stats(const std::string& path) {
  try {
    const hrsm::Matrixd samples = hrsm::read_matrix_csv(path);
    return hrsm::precompute(samples, hrsm::log_weight<double>());
  } catch (const std::exception& err) {
    throw std::runtime_error(err.what());
  }
}

int cmd_fit(const FitArgs& args) {
  const hrsm::SufficientStats stats = load_stats(args.data);
  hrsm::FitConfig config;
  config.tol = args.tol;
  config.max_sweeps = args.max_sweeps;
  const hrsm::Estimate estimate = hrsm::fit(stats, args.r, nullptr, config);
  if (!args.out.empty()) {
    hrsm::write_json_file(args.out, hrsm::estimate_to_json(estimate, args.r));
  }
  std::cout << "objective=" << estimate.objective << " sweeps=" << estimate.sweeps_used
            << " zero_ratio=" << hrsm::zero_ratio(estimate.lambda)
            << " converged=" << (estimate.converged ? "true" : "false") << '\n';
  return 0;
}

struct PathArgs {
  std::string data;
  std::vector<double> multipliers{1000, 100, 10, 1, 0.1, 0.01, 0};
  double tol = 1e-11;
  int max_sweeps = 10000;
  std::string out;
};

int cmd_path(const PathArgs& args) {
  const hrsm::SufficientStats stats = load_stats(args.data);

  std::vector<double> multipliers = args.multipliers;
  std::vector<double> sorted = multipliers;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  if (sorted != multipliers) {
    std::cerr << "warning: grid multipliers re-sorted in descending order\n";
  }
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() != multipliers.size()) {
    std::cerr << "warning: duplicate grid multipliers dropped\n";
  }

  const double unit =
      std::sqrt(std::log(static_cast<double>(stats.d)) / static_cast<double>(stats.n));
  std::vector<double> grid;
  grid.reserve(sorted.size());
  for (double m : sorted) grid.push_back(m * unit);

  hrsm::FitConfig config;
  config.tol = args.tol;
  config.max_sweeps = args.max_sweeps;
  const hrsm::PathResult path = hrsm::fit_path(stats, grid, config);
  if (!args.out.empty()) hrsm::write_json_file(args.out, hrsm::path_to_json(path));
  for (std::size_t i = 0; i < path.estimates.size(); ++i) {
    std::cout << "r=" << path.grid[i] << " objective=" << path.estimates[i].objective
              << " sweeps=" << path.estimates[i].sweeps_used
              << " zero_ratio=" << hrsm::zero_ratio(path.estimates[i].lambda) << '\n';
  }
  return 0;
}

struct ReproduceArgs {
  std::string config;
  std::string out;
  std::string format = "csv";
  int threads = 1;
};

int cmd_reproduce(const ReproduceArgs& args) {
  hrsm::ExperimentSpec spec;
  try {
    spec = hrsm::spec_from_json(hrsm::read_json_file(args.config));
  } catch (const std::exception& err) {
    std::cerr << "error: invalid config: " << err.what() << '\n';
    return 2;
  }
  log_verbose("running " + std::to_string(spec.replicates) + " replicates at d=" +
              std::to_string(spec.d) + ", n=" + std::to_string(spec.n));
  const hrsm::ExperimentResult result = hrsm::run_experiment(spec, args.threads);
  hrsm::emit_table(result, args.format, args.out);
  std::cout << "rows=" << result.multipliers.size() << " n_u_mean=" << result.n_u_mean << '\n';
  return 0;
}

struct ConvertArgs {
  std::string in;
  std::string what;
  int m = 1;  // 1-based anchor
  std::string out;
};

int cmd_convert(const ConvertArgs& args) {
  hrsm::Matrixd input;
  try {
    input = read_matrix_any(args.in);
    if (args.what != "theta2gamma") hrsm::validate_variogram(input);
  } catch (const std::exception& err) {
    throw std::runtime_error(err.what());
  }
  if (args.m < 1 || static_cast<hrsm::Index>(args.m) > input.rows()) {
    throw std::invalid_argument("--m must be in 1.." + std::to_string(input.rows()));
  }
  const hrsm::Index m = static_cast<hrsm::Index>(args.m) - 1;
  if (args.what == "gamma2theta") {
    const auto parts = hrsm::hr_to_mu_lambda(input, m);
    write_matrix_any(args.out, hrsm::lambda_to_theta(parts.lambda));
  } else if (args.what == "theta2gamma") {
    const hrsm::Matrixd gamma = hrsm::theta_to_gamma(input, m);
    double max_discrepancy = 0.0;
    for (hrsm::Index other = 0; other < input.rows(); ++other) {
      const hrsm::Matrixd alt = hrsm::theta_to_gamma(input, other);
      max_discrepancy = std::max(max_discrepancy, (alt - gamma).cwiseAbs().maxCoeff());
    }
    std::cout << "m_invariance_max_discrepancy=" << max_discrepancy << '\n';
    write_matrix_any(args.out, gamma);
  } else {
    const auto parts = hrsm::hr_to_mu_lambda(input, m);
    nlohmann::json mu = nlohmann::json::array();
    for (hrsm::Index j = 0; j < parts.mu.size(); ++j) mu.push_back(parts.mu(j));
    nlohmann::json triplets = nlohmann::json::array();
    for (hrsm::Index j = 0; j < parts.lambda.rows(); ++j) {
      for (hrsm::Index k = j + 1; k < parts.lambda.cols(); ++k) {
        if (parts.lambda(j, k) != 0.0) triplets.push_back({j + 1, k + 1, parts.lambda(j, k)});
      }
    }
    hrsm::write_json_file(args.out, {{"d", parts.mu.size()},
                                     {"m", args.m},
                                     {"mu", std::move(mu)},
                                     {"lambda_upper", std::move(triplets)}});
  }
  return 0;
}

template <class Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::cout << std::setprecision(17);
  CLI::App app{"Huesler-Reiss score-matching toolkit"};
  app.require_subcommand(1);
  app.add_flag("--verbose", g_verbose, "log progress to stderr");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate exceedance samples");
  simulate->add_option("--d", sim.d, "dimension")->required()->check(CLI::Range(2, 100000));
  simulate->add_option("--n", sim.n, "sample count")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--design", sim.design, "pareto or maxstable")
      ->check(CLI::IsMember({"pareto", "maxstable"}));
  simulate->add_option("--quantile", sim.quantile, "threshold quantile for maxstable")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--out", sim.out, "output CSV path")->required();

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit one estimate from a sample CSV");
  fit->add_option("--data", fit_args.data, "sample CSV")->required();
  fit->add_option("--r", fit_args.r, "tuning parameter r")->check(CLI::NonNegativeNumber);
  fit->add_option("--tol", fit_args.tol, "convergence tolerance")->check(CLI::PositiveNumber);
  fit->add_option("--max-sweeps", fit_args.max_sweeps, "sweep cap")->check(CLI::PositiveNumber);
  fit->add_option("--out", fit_args.out, "estimate JSON path");

  PathArgs path_args;
  auto* path = app.add_subcommand("path", "fit a warm-started tuning-parameter path");
  path->add_option("--data", path_args.data, "sample CSV")->required();
  path->add_option("--grid-multipliers", path_args.multipliers,
                   "multipliers of sqrt(log d / n)")
      ->delimiter(',');
  path->add_option("--tol", path_args.tol, "convergence tolerance")->check(CLI::PositiveNumber);
  path->add_option("--max-sweeps", path_args.max_sweeps, "sweep cap")
      ->check(CLI::PositiveNumber);
  path->add_option("--out", path_args.out, "path JSON output");

  ReproduceArgs rep;
  auto* reproduce = app.add_subcommand("reproduce", "run a replicated experiment from a config");
  reproduce->add_option("--config", rep.config, "experiment config JSON")->required();
  reproduce->add_option("--out", rep.out, "table output path")->required();
  reproduce->add_option("--format", rep.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  reproduce->add_option("--threads", rep.threads, "replicate parallelism (metric runs)")
      ->check(CLI::PositiveNumber);

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "convert between parameterizations");
  convert->add_option("--in", conv.in, "input matrix (CSV or JSON)")->required();
  convert->add_option("--what", conv.what, "conversion")
      ->required()
      ->check(CLI::IsMember({"gamma2theta", "theta2gamma", "gamma2mulambda"}));
  convert->add_option("--m", conv.m, "anchor index (1-based)")->check(CLI::PositiveNumber);
  convert->add_option("--out", conv.out, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  if (simulate->parsed()) return run_guarded([&] { return cmd_simulate(sim); });
  if (fit->parsed()) return run_guarded([&] { return cmd_fit(fit_args); });
  if (path->parsed()) return run_guarded([&] { return cmd_path(path_args); });
  if (reproduce->parsed()) return run_guarded([&] { return cmd_reproduce(rep); });
  if (convert->parsed()) return run_guarded([&] { return cmd_convert(conv); });
  return 2;
}
