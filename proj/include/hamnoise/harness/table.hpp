#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace hamnoise::harness {

using Cell = std::variant<double, std::int64_t, std::string>;

/// Shortest round-trip text for a double; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  void write_csv(std::ostream& os) const;
  /// Array of objects keyed by column name.
  void write_json(std::ostream& os) const;
  /// Writes `<stem>.csv` or `<stem>.json` under dir; returns the path.
  std::string save(const std::string& dir, const std::string& stem, const std::string& format) const;
};

}  // namespace hamnoise::harness
