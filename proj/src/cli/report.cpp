#include "confocal/cli/report.hpp"

#include "confocal/common.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace confocal::cli {

using nlohmann::json;

CheckRecord at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

CheckRecord at_least(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value >= threshold};
}

bool RunReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

namespace {

// JSON has no inf/nan; those become strings so the record stays readable.
json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

}  // namespace

json RunReport::to_json() const {
  json j;
  j["command"] = command;
  j["pass"] = pass();
  j["checks"] = json::array();
  for (const auto& c : checks)
    j["checks"].push_back(
        {{"name", c.name}, {"value", number(c.value)}, {"threshold", number(c.threshold)}, {"pass", c.pass}});
  j["details"] = details;
  j["files"] = files;
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
    out << '\n';
  }
}

void write_table_json(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < r.size() && i < header.size(); ++i) obj[header[i]] = number(r[i]);
    arr.push_back(std::move(obj));
  }
  write_json(path, arr);
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) return t;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (row.size() != t.header.size())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong number of columns");
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace confocal::cli
