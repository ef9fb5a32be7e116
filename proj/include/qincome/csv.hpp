#pragma once

// RFC-4180-style CSV reading: header row required, quoted fields with ""
// escapes, LF or CRLF line endings.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qincome::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return j;
    throw std::runtime_error("csv: missing column '" + name + "'");
  }
};

inline Table parse(const std::string& text) {
  Table table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any_field = false;

  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    any_field = false;
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty()) {
      table.header = record;
    } else {
      table.rows.push_back(record);
    }
    record.clear();
  };

  std::size_t i = 0;
  // strip a UTF-8 BOM if present
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
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
        any_field = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        any_field = true;
        break;
    }
  }
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
  if (any_field || !field.empty() || !record.empty()) end_record();

  if (table.header.empty()) throw std::runtime_error("csv: missing header row");
  for (const auto& row : table.rows)
    if (row.size() != table.header.size())
      throw std::runtime_error("csv: row with " + std::to_string(row.size()) +
                               " fields, expected " +
                               std::to_string(table.header.size()));
  return table;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

inline double parse_double(const std::string& cell, std::size_t row,
                           const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    while (used < cell.size() &&
           (cell[used] == ' ' || cell[used] == '\t'))
      ++used;
    if (used != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("csv: row " + std::to_string(row) + ", column '" +
                             column + "': cannot parse '" + cell + "'");
  }
}

}  // namespace qincome::csv
