// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_INDICATORS_HPP
#define MADPFI_INDICATORS_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "madpfi/csv.hpp"
#include "madpfi/dates.hpp"
#include "madpfi/errors.hpp"
#include "madpfi/text.hpp"

namespace madpfi {

/// Per-country national attributes. Any field may be missing; consumers
/// apply listwise deletion.
struct CountryIndicators {
  std::string country;
  std::optional<double> pfi;               // >= 0, lower = freer press
  std::optional<double> cellular_per_100;
  std::optional<double> gdp_per_capita;    // > 0 (log-transformed downstream)
  std::optional<double> population;        // > 0 (log-transformed downstream)
  std::optional<double> unemployment_pct;  // [0, 100]
};

inline constexpr std::string_view kIndicatorsHeader =
    "country,pfi,cellular_per_100,gdp_per_capita,population,unemployment_pct";

namespace detail {

inline std::optional<double> parse_opt_double(std::string_view cell,
                                              const std::string& file,
                                              std::size_t lineno,
                                              const char* column) {
  const std::string_view t = trim(cell);
  if (t.empty()) return std::nullopt;
  const std::string buf(t);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size())
    throw ParseError(file, lineno,
                     std::string("bad number '") + buf + "' in column " +
                         column);
  return v;
}

inline void validate_indicators(const CountryIndicators& row,
                                const std::string& file,
                                std::size_t lineno) {
  auto bad = [&](const std::string& msg) -> ParseError {
    return ParseError(file, lineno, "country '" + row.country + "': " + msg);
  };
  if (row.country.empty()) throw bad("empty country code");
  if (row.pfi && *row.pfi < 0) throw bad("pfi must be >= 0");
  if (row.gdp_per_capita && *row.gdp_per_capita <= 0)
    throw bad("gdp_per_capita must be > 0");
  if (row.population && *row.population <= 0)
    throw bad("population must be > 0");
  if (row.unemployment_pct &&
      (*row.unemployment_pct < 0 || *row.unemployment_pct > 100))
    throw bad("unemployment_pct must be in [0,100]");
}

inline std::string format_opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", *v);
  return buf;
}

}  // namespace detail

inline std::vector<CountryIndicators> read_indicators(
    const std::string& path) {
  const CsvTable table = csv_read_file(path);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) header += ',';
    header += std::string(trim(table.header[i]));
  }
  if (header != kIndicatorsHeader)
    throw ParseError(path, 1,
                     "expected header '" + std::string(kIndicatorsHeader) +
                         "', got '" + header + "'");
  std::vector<CountryIndicators> rows;
  rows.reserve(table.rows.size());
  std::set<std::string> seen;
  std::size_t lineno = 1;
  for (const auto& fields : table.rows) {
    ++lineno;
    if (fields.size() != 6)
      throw ParseError(path, lineno,
                       "expected 6 fields, got " +
                           std::to_string(fields.size()));
    CountryIndicators row;
    row.country = std::string(trim(fields[0]));
    row.pfi = detail::parse_opt_double(fields[1], path, lineno, "pfi");
    row.cellular_per_100 =
        detail::parse_opt_double(fields[2], path, lineno, "cellular_per_100");
    row.gdp_per_capita =
        detail::parse_opt_double(fields[3], path, lineno, "gdp_per_capita");
    row.population =
        detail::parse_opt_double(fields[4], path, lineno, "population");
    row.unemployment_pct =
        detail::parse_opt_double(fields[5], path, lineno, "unemployment_pct");
    detail::validate_indicators(row, path, lineno);
    if (!seen.insert(row.country).second)
      throw ParseError(path, lineno,
                       "duplicate country '" + row.country + "'");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_indicators(std::ostream& os,
                             const std::vector<CountryIndicators>& rows) {
  os << kIndicatorsHeader << '\n';
  for (const auto& r : rows) {
    os << r.country << ',' << detail::format_opt(r.pfi) << ','
       << detail::format_opt(r.cellular_per_100) << ','
       << detail::format_opt(r.gdp_per_capita) << ','
       << detail::format_opt(r.population) << ','
       << detail::format_opt(r.unemployment_pct) << '\n';
  }
}

inline void write_indicators_file(const std::string& path,
                                  const std::vector<CountryIndicators>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_indicators(out, rows);
}

/// Optional per-window response values for panel regressions. When the
/// file is absent, panel fits repeat each country's single value.
struct PanelPfiRow {
  std::string country;
  Date window_start;
  Date window_end;
  double pfi = 0;
};

inline constexpr std::string_view kPanelPfiHeader =
    "country,window_start,window_end,pfi";

inline std::vector<PanelPfiRow> read_panel_pfi(const std::string& path) {
  const CsvTable table = csv_read_file(path);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) header += ',';
    header += std::string(trim(table.header[i]));
  }
  if (header != kPanelPfiHeader)
    throw ParseError(path, 1,
                     "expected header '" + std::string(kPanelPfiHeader) +
                         "', got '" + header + "'");
  std::vector<PanelPfiRow> rows;
  std::size_t lineno = 1;
  for (const auto& fields : table.rows) {
    ++lineno;
    if (fields.size() != 4)
      throw ParseError(path, lineno,
                       "expected 4 fields, got " +
                           std::to_string(fields.size()));
    PanelPfiRow row;
    row.country = std::string(trim(fields[0]));
    row.window_start = Date::parse(trim(fields[1]));
    row.window_end = Date::parse(trim(fields[2]));
    const auto v = detail::parse_opt_double(fields[3], path, lineno, "pfi");
    if (!v) throw ParseError(path, lineno, "pfi cell may not be empty");
    row.pfi = *v;
    if (row.pfi < 0) throw ParseError(path, lineno, "pfi must be >= 0");
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_panel_pfi(std::ostream& os,
                            const std::vector<PanelPfiRow>& rows) {
  os << kPanelPfiHeader << '\n';
  for (const auto& r : rows) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", r.pfi);
    os << r.country << ',' << r.window_start.to_string() << ','
       << r.window_end.to_string() << ',' << buf << '\n';
  }
}

}  // namespace madpfi

#endif  // MADPFI_INDICATORS_HPP
