#pragma once

// File formats: matrices as headerless CSV (row-major, '.' decimal, 12
// significant digits) or as {"d", "entries"} JSON; estimates and paths as
// JSON with 1-based indices in the sparse Lambda triplets.

#include <string>
#include <vector>

#include <json.hpp>

#include "hrsm/solver.hpp"
#include "hrsm/types.hpp"

namespace hrsm {

Matrixd read_matrix_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrixd& matrix);

nlohmann::json matrix_to_json(const Matrixd& matrix);
Matrixd matrix_from_json(const nlohmann::json& object);
void write_matrix_json(const std::string& path, const Matrixd& matrix);
Matrixd read_matrix_json(const std::string& path);

/// {"d", "r", "mu", "lambda_upper": [[j, k, value], ...] (1-based, non-zero
/// entries only), "objective", "sweeps", "converged"}.
nlohmann::json estimate_to_json(const Estimate& estimate, double r);
nlohmann::json path_to_json(const PathResult& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& object);

}  // namespace hrsm
