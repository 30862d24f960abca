#include "pan/cli/emit.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pan::cli {

void Table::Add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, header has " +
                                std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

Format ParseFormat(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  throw std::invalid_argument("unknown format '" + name + "' (expected csv or json)");
}

Format FormatForPath(const std::string& path) {
  return std::filesystem::path(path).extension() == ".json" ? Format::kJson : Format::kCsv;
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string CellText(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return std::isnan(v) ? "" : FormatDouble(v); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  } visit;
  return std::visit(visit, c);
}

nlohmann::ordered_json CellJson(const Cell& c) {
  struct {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(std::uint64_t v) const { return v; }
    nlohmann::ordered_json operator()(double v) const {
      if (std::isnan(v)) return nullptr;
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      return v;
    }
    nlohmann::ordered_json operator()(bool b) const { return b; }
  } visit;
  return std::visit(visit, c);
}

}  // namespace

std::string RenderCsv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += CsvField(table.columns[i]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += CsvField(CellText(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string RenderJson(const nlohmann::ordered_json& config, const Table& table) {
  nlohmann::ordered_json doc;
  doc["config"] = config;
  doc["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = CellJson(row[i]);
    rows.push_back(std::move(obj));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

Table TableFromJson(const nlohmann::ordered_json& doc) {
  Table t;
  t.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& obj : doc.at("rows")) {
    std::vector<Cell> row;
    for (const auto& col : t.columns) {
      const auto& v = obj.at(col);
      if (v.is_null()) {
        row.emplace_back(std::monostate{});
      } else if (v.is_boolean()) {
        row.emplace_back(v.get<bool>());
      } else if (v.is_number_unsigned()) {
        row.emplace_back(v.get<std::uint64_t>());
      } else if (v.is_number_integer()) {
        row.emplace_back(v.get<std::int64_t>());
      } else if (v.is_number_float()) {
        row.emplace_back(v.get<double>());
      } else {
        const auto s = v.get<std::string>();
        if (s == "inf") {
          row.emplace_back(std::numeric_limits<double>::infinity());
        } else if (s == "-inf") {
          row.emplace_back(-std::numeric_limits<double>::infinity());
        } else {
          row.emplace_back(s);
        }
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void WriteOutput(const std::string& path, const std::string& content, bool force) {
  if (!force && std::filesystem::exists(path)) {
    throw std::runtime_error("output '" + path + "' exists; pass --force to overwrite");
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace pan::cli
