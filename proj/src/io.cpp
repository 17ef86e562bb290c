#include "hrsm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hrsm {

namespace {

std::string format_cell(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

}  // namespace

Matrixd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  Index row_index = 0;
  while (std::getline(in, line)) {
    ++row_index;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    Index col_index = 0;
    while (std::getline(fields, field, ',')) {
      ++col_index;
      std::size_t used = 0;
      double value = 0.0;
      bool ok = true;
      try {
        value = std::stod(field, &used);
      } catch (const std::exception&) {
        ok = false;
      }
      while (ok && used < field.size() &&
             (field[used] == ' ' || field[used] == '\t' || field[used] == '\r')) {
        ++used;
      }
      if (!ok || used != field.size()) {
        throw std::runtime_error("'" + path + "': bad numeric cell at row " +
                                 std::to_string(row_index) + ", column " +
                                 std::to_string(col_index));
      }
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("'" + path + "': row " + std::to_string(row_index) + " has " +
                               std::to_string(row.size()) + " columns, expected " +
                               std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("'" + path + "': no data rows");
  Matrixd matrix(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < matrix.rows(); ++i)
    for (Index j = 0; j < matrix.cols(); ++j)
      matrix(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return matrix;
}

void write_matrix_csv(const std::string& path, const Matrixd& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_cell(matrix(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

nlohmann::json matrix_to_json(const Matrixd& matrix) {
  nlohmann::json entries = nlohmann::json::array();
  for (Index i = 0; i < matrix.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < matrix.cols(); ++j) row.push_back(matrix(i, j));
    entries.push_back(std::move(row));
  }
  return {{"d", matrix.rows()}, {"entries", std::move(entries)}};
}

Matrixd matrix_from_json(const nlohmann::json& object) {
  if (!object.contains("d") || !object.contains("entries")) {
    throw std::runtime_error("matrix JSON must contain \"d\" and \"entries\"");
  }
  const auto& entries = object.at("entries");
  const Index rows = static_cast<Index>(entries.size());
  if (rows == 0) throw std::runtime_error("matrix JSON has no rows");
  const Index cols = static_cast<Index>(entries.at(0).size());
  Matrixd matrix(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = entries.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols) {
      throw std::runtime_error("matrix JSON rows have inconsistent lengths");
    }
    for (Index j = 0; j < cols; ++j) matrix(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  if (object.at("d").get<Index>() != matrix.rows()) {
    throw std::runtime_error("matrix JSON \"d\" does not match entry count");
  }
  return matrix;
}

void write_matrix_json(const std::string& path, const Matrixd& matrix) {
  write_json_file(path, matrix_to_json(matrix));
}

Matrixd read_matrix_json(const std::string& path) {
  return matrix_from_json(read_json_file(path));
}

nlohmann::json estimate_to_json(const Estimate& estimate, double r) {
  const Index d = estimate.mu.size();
  nlohmann::json triplets = nlohmann::json::array();
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      if (estimate.lambda(j, k) != 0.0) {
        triplets.push_back({j + 1, k + 1, estimate.lambda(j, k)});
      }
    }
  }
  nlohmann::json mu = nlohmann::json::array();
  for (Index j = 0; j < d; ++j) mu.push_back(estimate.mu(j));
  return {{"d", d},
          {"r", r},
          {"mu", std::move(mu)},
          {"lambda_upper", std::move(triplets)},
          {"objective", estimate.objective},
          {"sweeps", estimate.sweeps_used},
          {"converged", estimate.converged}};
}

nlohmann::json path_to_json(const PathResult& path) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < path.estimates.size(); ++i) {
    out.push_back(estimate_to_json(path.estimates[i], path.grid[i]));
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  nlohmann::json object;
  try {
    in >> object;
  } catch (const nlohmann::json::parse_error& err) {
    throw std::runtime_error("'" + path + "': " + err.what());
  }
  return object;
}

void write_json_file(const std::string& path, const nlohmann::json& object) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << object.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace hrsm
