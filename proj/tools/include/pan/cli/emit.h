#ifndef PAN_CLI_EMIT_H
#define PAN_CLI_EMIT_H

// Tabular result emission. Cells are typed so that CSV and JSON renderings
// agree; doubles use the shortest round-trip representation.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace pan::cli {

// monostate renders as an empty CSV cell and JSON null.
using Cell = std::variant<std::monostate, std::string, std::int64_t, std::uint64_t, double, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  // Throws std::invalid_argument if the row width differs from the header.
  void Add(std::vector<Cell> row);
};

enum class Format { kCsv, kJson };

// "csv" or "json"; throws std::invalid_argument otherwise.
Format ParseFormat(const std::string& name);
// json for a ".json" suffix, csv otherwise.
Format FormatForPath(const std::string& path);

std::string FormatDouble(double v);

// RFC 4180: fields containing comma, quote, CR or LF are quoted, quotes doubled.
std::string CsvField(const std::string& s);
std::string RenderCsv(const Table& table);

// {"config": ..., "rows": [{column: value, ...}, ...]}. Infinite doubles
// become the strings "inf" / "-inf", NaN becomes null.
std::string RenderJson(const nlohmann::ordered_json& config, const Table& table);

// Inverse of RenderJson's row encoding, used by the round-trip tests.
Table TableFromJson(const nlohmann::ordered_json& doc);

// Writes atomically enough for our purposes: the whole buffer or an error.
// Throws std::runtime_error if the file exists and !force, or on I/O failure.
void WriteOutput(const std::string& path, const std::string& content, bool force);

}  // namespace pan::cli

#endif  // PAN_CLI_EMIT_H
