#include "hrsm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "hrsm/model.hpp"
#include "hrsm/rng.hpp"

namespace hrsm {

std::string to_string(Design design) {
  return design == Design::exact_pareto ? "exact_pareto" : "max_stable";
}

std::string to_string(GridReference reference) {
  return reference == GridReference::n ? "n" : "n_u";
}

double rmse_theta(const Matrixd& est, const Matrixd& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw std::invalid_argument("rmse_theta: dimension mismatch");
  }
  return (est - truth).norm() / static_cast<double>(est.rows());
}

std::optional<double> rmse_gamma(const Matrixd& est_theta, const Matrixd& truth_gamma, Index m) {
  if (est_theta.rows() != truth_gamma.rows()) {
    throw std::invalid_argument("rmse_gamma: dimension mismatch");
  }
  try {
    return rmse_theta(theta_to_gamma(est_theta, m), truth_gamma);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

Index zero_count(const Matrixd& lambda) {
  Index zeros = 0;
  for (Index j = 0; j < lambda.rows(); ++j)
    for (Index k = j + 1; k < lambda.cols(); ++k) zeros += lambda(j, k) == 0.0;
  return zeros;
}

double zero_ratio(const Matrixd& lambda) {
  const Index d = lambda.rows();
  return static_cast<double>(zero_count(lambda)) / (static_cast<double>(d) * (d - 1) / 2.0);
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field \"" + field + "\": " + why);
}

template <class T>
T require_field(const nlohmann::json& config, const std::string& field) {
  if (!config.contains(field)) bad_field(field, "missing");
  try {
    return config.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    bad_field(field, "wrong type");
  }
}

}  // namespace

ExperimentSpec spec_from_json(const nlohmann::json& config) {
  ExperimentSpec spec;
  spec.d = require_field<Index>(config, "d");
  if (spec.d < 2) bad_field("d", "must be >= 2");
  spec.n = require_field<Index>(config, "n");
  if (spec.n < 1) bad_field("n", "must be >= 1");
  spec.replicates = require_field<int>(config, "N");
  if (spec.replicates < 1) bad_field("N", "must be >= 1");
  spec.grid_multipliers = require_field<std::vector<double>>(config, "grid_multipliers");
  if (spec.grid_multipliers.empty()) bad_field("grid_multipliers", "must be non-empty");
  for (double m : spec.grid_multipliers) {
    if (!(m >= 0.0)) bad_field("grid_multipliers", "entries must be nonnegative");
  }
  const auto design = require_field<std::string>(config, "design");
  if (design == "exact_pareto" || design == "pareto") {
    spec.design = Design::exact_pareto;
  } else if (design == "max_stable" || design == "maxstable") {
    spec.design = Design::max_stable;
  } else {
    bad_field("design", "expected \"exact_pareto\" or \"max_stable\"");
  }
  spec.quantile = require_field<double>(config, "quantile");
  if (!(spec.quantile > 0.0 && spec.quantile < 1.0)) bad_field("quantile", "must be in (0,1)");
  spec.seed = require_field<std::uint64_t>(config, "seed");
  const auto reference = require_field<std::string>(config, "grid_reference");
  if (reference == "n") {
    spec.grid_reference = GridReference::n;
  } else if (reference == "n_u") {
    spec.grid_reference = GridReference::n_u;
  } else {
    bad_field("grid_reference", "expected \"n\" or \"n_u\"");
  }
  return spec;
}

namespace {

std::vector<double> descending_multipliers(const ExperimentSpec& spec) {
  std::vector<double> multipliers = spec.grid_multipliers;
  std::sort(multipliers.begin(), multipliers.end(), std::greater<double>());
  for (std::size_t i = 1; i < multipliers.size(); ++i) {
    if (multipliers[i] == multipliers[i - 1]) {
      bad_field("grid_multipliers", "entries must be distinct");
    }
  }
  return multipliers;
}

ReplicateResult run_replicate(const ExperimentSpec& spec, const std::vector<double>& multipliers,
                              const Matrixd& gamma, const Matrixd& theta_truth, int replicate) {
  SplitMix64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(replicate)));
  ExceedanceBatch batch;
  if (spec.design == Design::exact_pareto) {
    batch = sample_hr_pareto(gamma, spec.n, rng);
  } else {
    batch = threshold_exceedances(sample_max_stable(gamma, spec.n, rng), spec.quantile);
  }

  ReplicateResult result;
  result.n_u = batch.n_u();
  const double n_ref = spec.grid_reference == GridReference::n
                           ? static_cast<double>(spec.n)
                           : static_cast<double>(batch.n_u());
  const double unit = std::sqrt(std::log(static_cast<double>(spec.d)) / n_ref);
  result.r_values.reserve(multipliers.size());
  for (double m : multipliers) result.r_values.push_back(m * unit);

  const auto pre_start = std::chrono::steady_clock::now();
  const SufficientStats stats = precompute(batch.samples, log_weight<double>());
  const auto pre_stop = std::chrono::steady_clock::now();
  result.t_pre = std::chrono::duration<double>(pre_stop - pre_start).count();

  const auto opt_start = std::chrono::steady_clock::now();
  const PathResult path = fit_path(stats, result.r_values, spec.fit);
  const auto opt_stop = std::chrono::steady_clock::now();
  result.t_opt = std::chrono::duration<double>(opt_stop - opt_start).count();

  result.per_r.reserve(path.estimates.size());
  for (const Estimate& est : path.estimates) {
    Metrics metrics;
    metrics.rmse_theta = rmse_theta(est.theta, theta_truth);
    metrics.rmse_gamma = rmse_gamma(est.theta, gamma, 0);
    metrics.zero_ratio = zero_ratio(est.lambda);
    result.per_r.push_back(std::move(metrics));
    result.degenerate = result.degenerate || est.degenerate;
  }
  return result;
}

// Two-pass mean/std; sample standard deviation, 0 when fewer than two values.
Aggregate aggregate(const std::vector<double>& values) {
  Aggregate agg;
  agg.count = static_cast<int>(values.size());
  if (values.empty()) {
    agg.mean = std::numeric_limits<double>::quiet_NaN();
    agg.stddev = std::numeric_limits<double>::quiet_NaN();
    return agg;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return agg;
  double ss = 0.0;
  for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return agg;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads) {
  ExperimentResult result;
  result.spec = spec;
  result.multipliers = descending_multipliers(spec);
  const Matrixd gamma = brownian_variogram(spec.d);
  const Matrixd theta_truth = tridiagonal_theta(spec.d);

  result.replicates.resize(static_cast<std::size_t>(spec.replicates));
  if (threads <= 1) {
    for (int rep = 0; rep < spec.replicates; ++rep) {
      result.replicates[static_cast<std::size_t>(rep)] =
          run_replicate(spec, result.multipliers, gamma, theta_truth, rep);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int rep = next.fetch_add(1);
        if (rep >= spec.replicates) return;
        result.replicates[static_cast<std::size_t>(rep)] =
            run_replicate(spec, result.multipliers, gamma, theta_truth, rep);
      }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(threads, spec.replicates);
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
  }

  const std::size_t n_grid = result.multipliers.size();
  result.r_value_mean.assign(n_grid, 0.0);
  for (std::size_t g = 0; g < n_grid; ++g) {
    std::vector<double> rmse_t, rmse_g, zeros;
    for (const ReplicateResult& rep : result.replicates) {
      result.r_value_mean[g] += rep.r_values[g] / static_cast<double>(spec.replicates);
      rmse_t.push_back(rep.per_r[g].rmse_theta);
      if (rep.per_r[g].rmse_gamma) rmse_g.push_back(*rep.per_r[g].rmse_gamma);
      zeros.push_back(rep.per_r[g].zero_ratio);
    }
    result.agg_rmse_theta.push_back(aggregate(rmse_t));
    result.agg_rmse_gamma.push_back(aggregate(rmse_g));
    result.agg_zero_ratio.push_back(aggregate(zeros));
  }
  for (const ReplicateResult& rep : result.replicates) {
    result.t_pre_mean += rep.t_pre / static_cast<double>(spec.replicates);
    result.t_opt_mean += rep.t_opt / static_cast<double>(spec.replicates);
    result.n_u_mean += static_cast<double>(rep.n_u) / static_cast<double>(spec.replicates);
  }
  return result;
}

namespace {

std::string csv_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

std::string csv_optional(const Aggregate& agg, bool stddev) {
  if (agg.count == 0) return "";
  return csv_number(stddev ? agg.stddev : agg.mean);
}

}  // namespace

std::string table_to_csv(const ExperimentResult& result) {
  std::string out =
      "r_multiplier,r_value,rmse_theta_mean,rmse_theta_std,rmse_gamma_mean,rmse_gamma_std,"
      "zero_ratio_mean,zero_ratio_std,t_pre_mean,t_opt_mean,n,n_u_mean,d,N\n";
  for (std::size_t g = 0; g < result.multipliers.size(); ++g) {
    out += csv_number(result.multipliers[g]);
    out += ',' + csv_number(result.r_value_mean[g]);
    out += ',' + csv_number(result.agg_rmse_theta[g].mean);
    out += ',' + csv_number(result.agg_rmse_theta[g].stddev);
    out += ',' + csv_optional(result.agg_rmse_gamma[g], false);
    out += ',' + csv_optional(result.agg_rmse_gamma[g], true);
    out += ',' + csv_number(result.agg_zero_ratio[g].mean);
    out += ',' + csv_number(result.agg_zero_ratio[g].stddev);
    out += ',' + csv_number(result.t_pre_mean);
    out += ',' + csv_number(result.t_opt_mean);
    out += ',' + std::to_string(result.spec.n);
    out += ',' + csv_number(result.n_u_mean);
    out += ',' + std::to_string(result.spec.d);
    out += ',' + std::to_string(result.spec.replicates);
    out += '\n';
  }
  return out;
}

nlohmann::json table_to_json(const ExperimentResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t g = 0; g < result.multipliers.size(); ++g) {
    nlohmann::json row = {
        {"r_multiplier", result.multipliers[g]},
        {"r_value", result.r_value_mean[g]},
        {"rmse_theta_mean", result.agg_rmse_theta[g].mean},
        {"rmse_theta_std", result.agg_rmse_theta[g].stddev},
        {"zero_ratio_mean", result.agg_zero_ratio[g].mean},
        {"zero_ratio_std", result.agg_zero_ratio[g].stddev},
        {"t_pre_mean", result.t_pre_mean},
        {"t_opt_mean", result.t_opt_mean},
        {"n", result.spec.n},
        {"n_u_mean", result.n_u_mean},
        {"d", result.spec.d},
        {"N", result.spec.replicates},
    };
    if (result.agg_rmse_gamma[g].count > 0) {
      row["rmse_gamma_mean"] = result.agg_rmse_gamma[g].mean;
      row["rmse_gamma_std"] = result.agg_rmse_gamma[g].stddev;
    } else {
      row["rmse_gamma_mean"] = nullptr;
      row["rmse_gamma_std"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  return {{"design", to_string(result.spec.design)},
          {"grid_reference", to_string(result.spec.grid_reference)},
          {"seed", result.spec.seed},
          {"quantile", result.spec.quantile},
          {"rows", std::move(rows)}};
}

void emit_table(const ExperimentResult& result, const std::string& format,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  if (format == "csv") {
    out << table_to_csv(result);
  } else if (format == "json") {
    out << table_to_json(result).dump(2) << '\n';
  } else {
    throw std::invalid_argument("emit_table: format must be \"csv\" or \"json\"");
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace hrsm
