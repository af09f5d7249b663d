// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_CSV_HPP
#define MADPFI_CSV_HPP

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "madpfi/errors.hpp"

namespace madpfi {

/// Splits one CSV record. Handles RFC 4180 quoting; embedded newlines are
/// not supported (records are line-delimited in all formats used here).
inline std::vector<std::string> csv_split(std::string_view line,
                                          const std::string& file = "",
                                          std::size_t lineno = 0) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < n && line[i + 1] == '"') {
          cur += '"';
          i += 2;
        } else {
          quoted = false;
          ++i;
        }
      } else {
        cur += c;
        ++i;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
      ++i;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      ++i;
    } else {
      cur += c;
      ++i;
    }
  }
  if (quoted)
    throw ParseError(file, lineno, "unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void csv_write_row(std::ostream& os,
                          const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_escape(fields[i]);
  }
  os << '\n';
}

/// Reads all records of a CSV file. The first record is the header.
/// Strips a UTF-8 BOM and trailing CR per line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable csv_read(std::istream& is, const std::string& file = "") {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0)
        line.erase(0, 3);
      table.header = csv_split(line, file, lineno);
      continue;
    }
    if (line.empty()) continue;
    table.rows.push_back(csv_split(line, file, lineno));
  }
  if (table.header.empty() && table.rows.empty())
    throw ParseError(file, 1, "empty CSV file");
  return table;
}

inline CsvTable csv_read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return csv_read(in, path);
}

}  // namespace madpfi

#endif  // MADPFI_CSV_HPP
