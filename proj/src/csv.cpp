#include "rrsens/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace rrsens {

namespace {

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quote_field(const std::string& field) {
  if (!needs_quoting(field)) return field;
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

double parse_number(const std::string& cell, const char* what, int row) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  // Reject trailing junk and empty cells; allow surrounding spaces.
  const char* p = end;
  while (*p == ' ' || *p == '\t') ++p;
  if (end == begin || *p != '\0' || errno == ERANGE) {
    std::ostringstream msg;
    msg << "data row " << row << ": cannot parse " << what << " value '" << cell << "'";
    throw ParseError(msg.str());
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "data row " << row << ": non-finite " << what << " value '" << cell << "'";
    throw ParseError(msg.str());
  }
  return value;
}

int find_column(const CsvTable& table, const std::string& name, const char* role) {
  for (size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] == name) return static_cast<int>(j);
  throw SchemaError(std::string(role) + " column '" + name + "' not found in CSV header");
}

bool all_numeric(const std::vector<std::string>& labels) {
  for (const auto& s : labels) {
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return false;
  }
  return true;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_started = false;

  auto end_field = [&]() {
    record.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    if (table.header.empty() && table.rows.empty() && !record_started) {
      // skip: nothing seen yet
    }
    if (table.header.empty())
      table.header = record;
    else
      table.rows.push_back(record);
    record.clear();
    record_started = false;
  };

  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        record_started = true;
        break;
      case ',':
        end_field();
        record_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_started = true;
        record_started = true;
        break;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field at end of CSV input");
  if (record_started || field_started || !record.empty()) end_record();

  if (table.header.empty()) throw ParseError("CSV input has no header row");
  const size_t width = table.header.size();
  for (size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != width) {
      std::ostringstream msg;
      msg << "data row " << (r + 1) << ": expected " << width << " fields, found "
          << table.rows[r].size();
      throw ParseError(msg.str());
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open CSV file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  auto write_record = [&](const std::vector<std::string>& record) {
    for (size_t j = 0; j < record.size(); ++j) {
      if (j) out << ',';
      out << quote_field(record[j]);
    }
    out << '\n';
  };
  write_record(table.header);
  for (const auto& row : table.rows) write_record(row);
}

ObservationalDataset load_csv(const std::string& path, const CsvSchema& schema) {
  if (schema.covariates.empty()) throw SchemaError("schema lists no covariate columns");
  const CsvTable table = read_csv_file(path);
  const int n = static_cast<int>(table.rows.size());
  if (n < 1) throw ValidationError("CSV file contains a header but no data rows");

  const int treat_col = find_column(table, schema.treatment_column, "treatment");
  const int outcome_col = find_column(table, schema.outcome_column, "outcome");
  std::vector<int> cov_cols;
  for (const auto& cov : schema.covariates)
    cov_cols.push_back(find_column(table, cov.name, "covariate"));

  // Arm label order: supplied list first, then ordinal-numeric, then
  // first-appearance.
  std::vector<std::string> levels = schema.treatment_levels;
  if (levels.empty()) {
    std::vector<std::string> seen;
    for (const auto& row : table.rows) {
      const std::string& label = row[treat_col];
      if (std::find(seen.begin(), seen.end(), label) == seen.end()) seen.push_back(label);
    }
    if (schema.ordinal_treatment && all_numeric(seen)) {
      std::sort(seen.begin(), seen.end(), [](const std::string& a, const std::string& b) {
        return std::strtod(a.c_str(), nullptr) < std::strtod(b.c_str(), nullptr);
      });
    } else if (schema.ordinal_treatment) {
      std::sort(seen.begin(), seen.end());
    }
    levels = seen;
  }
  std::map<std::string, int> arm_of;
  for (size_t a = 0; a < levels.size(); ++a) arm_of[levels[a]] = static_cast<int>(a) + 1;

  Eigen::VectorXi treatment(n);
  Eigen::VectorXd outcome(n);
  for (int i = 0; i < n; ++i) {
    const std::string& label = table.rows[i][treat_col];
    const auto it = arm_of.find(label);
    if (it == arm_of.end()) {
      std::ostringstream msg;
      msg << "data row " << (i + 1) << ": treatment label '" << label
          << "' not in the declared level list";
      throw SchemaError(msg.str());
    }
    treatment[i] = it->second;
    outcome[i] = parse_number(table.rows[i][outcome_col], "outcome", i + 1);
  }

  // Resolve discovered categorical levels up front so the design width is known.
  std::vector<CovariateSpec> covs = schema.covariates;
  for (size_t k = 0; k < covs.size(); ++k) {
    if (!covs[k].discover_levels) continue;
    for (const auto& row : table.rows) {
      const std::string& cell = row[cov_cols[k]];
      if (std::find(covs[k].levels.begin(), covs[k].levels.end(), cell) == covs[k].levels.end())
        covs[k].levels.push_back(cell);
    }
  }

  std::vector<std::string> names;
  const bool prepend = !schema.intercept_present;
  if (prepend) names.push_back("(Intercept)");
  for (const auto& cov : covs) {
    if (!cov.categorical()) {
      names.push_back(cov.name);
    } else {
      if (cov.levels.size() < 2) {
        throw SchemaError("categorical covariate '" + cov.name + "' needs at least 2 levels");
      }
      for (size_t l = 1; l < cov.levels.size(); ++l)  // level 0 is the reference
        names.push_back(cov.name + "=" + cov.levels[l]);
    }
  }

  Eigen::MatrixXd design(n, static_cast<int>(names.size()));
  for (int i = 0; i < n; ++i) {
    int col = 0;
    if (prepend) design(i, col++) = 1.0;
    for (size_t k = 0; k < covs.size(); ++k) {
      const std::string& cell = table.rows[i][cov_cols[k]];
      if (!covs[k].categorical()) {
        design(i, col++) = parse_number(cell, ("covariate '" + covs[k].name + "'").c_str(), i + 1);
      } else {
        const auto it = std::find(covs[k].levels.begin(), covs[k].levels.end(), cell);
        if (it == covs[k].levels.end()) {
          std::ostringstream msg;
          msg << "data row " << (i + 1) << ": value '" << cell << "' of covariate '"
              << covs[k].name << "' not in the declared level list";
          throw SchemaError(msg.str());
        }
        const size_t idx = static_cast<size_t>(it - covs[k].levels.begin());
        for (size_t l = 1; l < covs[k].levels.size(); ++l) design(i, col++) = (idx == l) ? 1.0 : 0.0;
      }
    }
  }

  ObservationalDataset data =
      ObservationalDataset::create(std::move(design), std::move(treatment), std::move(outcome),
                                   static_cast<int>(levels.size()),
                                   /*has_intercept=*/prepend || schema.intercept_present,
                                   schema.ordinal_treatment);
  data.covariate_names = std::move(names);
  data.treatment_levels = std::move(levels);
  return data;
}

void save_csv(const ObservationalDataset& data, const std::string& path) {
  CsvTable table;
  table.header.push_back("treatment");
  table.header.push_back("outcome");
  const int first_col = data.has_intercept ? 1 : 0;
  for (int j = first_col; j < data.dim(); ++j) {
    table.header.push_back(static_cast<size_t>(j) < data.covariate_names.size()
                               ? data.covariate_names[j]
                               : "x" + std::to_string(j));
  }
  for (int i = 0; i < data.n(); ++i) {
    std::vector<std::string> row;
    const int arm = data.treatment[i];
    row.push_back(static_cast<size_t>(arm - 1) < data.treatment_levels.size()
                      ? data.treatment_levels[arm - 1]
                      : std::to_string(arm));
    row.push_back(format_double(data.outcome[i]));
    for (int j = first_col; j < data.dim(); ++j) row.push_back(format_double(data.covariates(i, j)));
    table.rows.push_back(std::move(row));
  }
  write_csv_file(path, table);
}

CsvSchema roundtrip_schema(const ObservationalDataset& data) {
  CsvSchema schema;
  schema.treatment_column = "treatment";
  schema.outcome_column = "outcome";
  const int first_col = data.has_intercept ? 1 : 0;
  for (int j = first_col; j < data.dim(); ++j) {
    CovariateSpec cov;
    cov.name = static_cast<size_t>(j) < data.covariate_names.size() ? data.covariate_names[j]
                                                                    : "x" + std::to_string(j);
    schema.covariates.push_back(std::move(cov));
  }
  schema.treatment_levels = data.treatment_levels;
  if (schema.treatment_levels.empty()) {
    for (int a = 1; a <= data.num_arms; ++a) schema.treatment_levels.push_back(std::to_string(a));
  }
  schema.ordinal_treatment = data.ordinal_treatment;
  schema.intercept_present = false;  // save_csv omits the intercept; the loader re-prepends it
  return schema;
}

}  // namespace rrsens
