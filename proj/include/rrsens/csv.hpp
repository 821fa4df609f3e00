#pragma once

#include "rrsens/types.hpp"

#include <string>
#include <vector>

namespace rrsens {

/// One covariate column. A non-empty `levels` list marks the column as
/// categorical and fixes the one-hot order (first level is the dropped
/// reference). `discover_levels` instead collects levels in first-appearance
/// order while reading.
struct CovariateSpec {
  std::string name;
  std::vector<std::string> levels;
  bool discover_levels = false;

  bool categorical() const { return discover_levels || !levels.empty(); }
};

/// Column-role mapping for load_csv.
struct CsvSchema {
  std::string treatment_column;
  std::string outcome_column;
  std::vector<CovariateSpec> covariates;
  /// Explicit arm-label order. Required for ordinal treatments unless every
  /// label parses as a number (then numeric ascending is used); nominal
  /// treatments default to first-appearance order.
  std::vector<std::string> treatment_levels;
  bool ordinal_treatment = false;
  /// When true the first listed covariate already holds the constant-1
  /// intercept; otherwise an intercept column is prepended.
  bool intercept_present = false;
};

/// Raw RFC-4180 table: header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_file(const std::string& path);
CsvTable parse_csv(const std::string& text);
void write_csv_file(const std::string& path, const CsvTable& table);

/// Reads and validates a dataset. Treatment labels are re-encoded to 1..J,
/// categorical covariates are one-hot expanded with the reference level
/// dropped, and an intercept column is prepended unless the schema declares
/// one present.
ObservationalDataset load_csv(const std::string& path, const CsvSchema& schema);

/// Writes a dataset back out (original treatment labels, 17-significant-digit
/// numerics, intercept column omitted when it was prepended at load).
void save_csv(const ObservationalDataset& data, const std::string& path);

/// Schema that reloads a save_csv file into the identical dataset.
CsvSchema roundtrip_schema(const ObservationalDataset& data);

/// Shortest-round-trip-style formatting used for all numeric file output.
std::string format_double(double value);

}  // namespace rrsens
