#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace confocal::cli {

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Passes when value <= threshold (NaN fails).
CheckRecord at_most(std::string name, double value, double threshold);
/// Passes when value >= threshold.
CheckRecord at_least(std::string name, double value, double threshold);

struct RunReport {
  std::string command;
  std::vector<CheckRecord> checks;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> files;  ///< outputs written

  bool pass() const;
  /// 0 when every check passes, 1 otherwise.
  int exit_code() const { return pass() ? 0 : 1; }
  nlohmann::json to_json() const;
};

// ---------------------------------------------------------------------------
// Writers. Floats are printed with 17 significant digits.

std::string format_double(double v);

/// Comma-separated table with a header row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// The same table as a JSON array of objects keyed by the header.
void write_table_json(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

void write_json(const std::string& path, const nlohmann::json& doc);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Reads a table written by write_csv.
Table read_csv(const std::string& path);

}  // namespace confocal::cli
