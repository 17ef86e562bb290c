#pragma once

// Evaluation metrics and the replicated experiment runner behind the
// benchmark tables: RMSE of Theta and of the reconstructed variogram,
// sparsity ratios, and timed precompute/optimization phases.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrsm/simulate.hpp"
#include "hrsm/solver.hpp"
#include "hrsm/types.hpp"

namespace hrsm {

enum class Design { exact_pareto, max_stable };
enum class GridReference { n, n_u };

std::string to_string(Design design);
std::string to_string(GridReference reference);

/// Entrywise root-mean-squared error (1/d^2 sum (A-B)^2)^{1/2}.
double rmse_theta(const Matrixd& est, const Matrixd& truth);

/// RMSE of the variogram reconstructed from est_theta at anchor m; absent
/// when the Theta minor is singular.
std::optional<double> rmse_gamma(const Matrixd& est_theta, const Matrixd& truth_gamma, Index m);

Index zero_count(const Matrixd& lambda);

/// Exactly-zero strictly-upper entries over d(d-1)/2.
double zero_ratio(const Matrixd& lambda);

struct ExperimentSpec {
  Index d = 0;
  Index n = 0;
  int replicates = 1;
  std::vector<double> grid_multipliers;
  Design design = Design::exact_pareto;
  double quantile = 0.95;
  std::uint64_t seed = 1;
  GridReference grid_reference = GridReference::n;
  FitConfig fit;
};

/// Parses {"d","n","N","grid_multipliers","design","quantile","seed",
/// "grid_reference"}; on bad or missing fields throws naming the field.
ExperimentSpec spec_from_json(const nlohmann::json& config);

struct Metrics {
  double rmse_theta = 0.0;
  std::optional<double> rmse_gamma;
  double zero_ratio = 0.0;
};

struct ReplicateResult {
  std::vector<double> r_values;  // descending, one per grid point
  std::vector<Metrics> per_r;
  double t_pre = 0.0;  // seconds, precompute only
  double t_opt = 0.0;  // seconds, full warm-started path
  Index n_u = 0;
  bool degenerate = false;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 when count < 2
  int count = 0;
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<double> multipliers;  // sorted descending
  std::vector<ReplicateResult> replicates;
  std::vector<double> r_value_mean;
  std::vector<Aggregate> agg_rmse_theta;
  std::vector<Aggregate> agg_rmse_gamma;
  std::vector<Aggregate> agg_zero_ratio;
  double t_pre_mean = 0.0;
  double t_opt_mean = 0.0;
  double n_u_mean = 0.0;
};

/// Per replicate: simulate, precompute (timed), warm-started path (timed),
/// metrics per grid point; then mean/std across replicates in replicate
/// order. Fully deterministic given spec.seed; threads > 1 fans replicates
/// out without changing results (intended for metric-only runs).
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1);

/// Aggregated table with columns (r_multiplier, r_value, rmse_theta_mean,
/// rmse_theta_std, rmse_gamma_mean, rmse_gamma_std, zero_ratio_mean,
/// zero_ratio_std, t_pre_mean, t_opt_mean, n, n_u_mean, d, N); format is
/// "csv" or "json". Absent rmse_gamma aggregates emit empty cells (CSV)
/// or null (JSON).
void emit_table(const ExperimentResult& result, const std::string& format,
                const std::string& path);

/// The table as CSV text (what emit_table writes in csv mode).
std::string table_to_csv(const ExperimentResult& result);
nlohmann::json table_to_json(const ExperimentResult& result);

}  // namespace hrsm
