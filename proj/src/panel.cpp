#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sglasso/matrix_io.hpp"
#include "sglasso/pipeline.hpp"

namespace sglasso {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

[[noreturn]] void fail_at(std::size_t row, std::size_t col, const std::string& what) {
  throw ParseError("CSV parse error at row " + std::to_string(row) + ", column " +
                   std::to_string(col) + ": " + what);
}

double parse_number(const std::string& s, std::size_t row, std::size_t col) {
  if (s.empty()) throw PanelError("missing cell at row " + std::to_string(row) + ", column " + std::to_string(col));
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    fail_at(row, col, "not a number: '" + s + "'");
  return v;
}

int parse_year(const std::string& s, std::size_t row, std::size_t col) {
  if (s.empty()) throw PanelError("missing year at row " + std::to_string(row));
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail_at(row, col, "not a year: '" + s + "'");
  return v;
}

void check_shape(const PanelData& panel) {
  if (panel.firms.size() < 2) throw PanelError("panel needs at least 2 firms");
  if (panel.years.size() < 4) throw PanelError("panel needs at least 4 years");
}

PanelData parse_long(const std::vector<std::vector<std::string>>& rows) {
  const std::vector<std::string> header{"firm_id", "firm_name", "year", "invest", "value", "capital"};
  if (rows.empty() || rows[0] != header)
    throw ParseError("CSV parse error at row 1, column 1: expected header firm_id,firm_name,year,invest,value,capital");

  struct Cell {
    double invest, value, capital;
  };
  std::vector<std::string> firms;
  std::map<std::string, std::map<int, Cell>> cells;
  std::set<int> years;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() != header.size())
      fail_at(line, std::min(row.size(), header.size()) + 1,
              "expected 6 fields, found " + std::to_string(row.size()));
    const std::string& name = row[1];
    if (name.empty()) throw PanelError("missing firm name at row " + std::to_string(line));
    const int year = parse_year(row[2], line, 3);
    const Cell c{parse_number(row[3], line, 4), parse_number(row[4], line, 5), parse_number(row[5], line, 6)};
    if (!cells.count(name)) firms.push_back(name);
    if (!cells[name].emplace(year, c).second)
      throw PanelError("duplicate row for firm '" + name + "', year " + std::to_string(year));
    years.insert(year);
  }

  PanelData panel;
  panel.firms = firms;
  panel.years.assign(years.begin(), years.end());
  const std::size_t T = panel.years.size(), p = firms.size();
  panel.invest = Matrix(T, p);
  panel.value = Matrix(T, p);
  panel.capital = Matrix(T, p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& byyear = cells[firms[j]];
    for (std::size_t t = 0; t < T; ++t) {
      const auto it = byyear.find(panel.years[t]);
      if (it == byyear.end())
        throw PanelError("firm '" + firms[j] + "' has no row for year " + std::to_string(panel.years[t]));
      panel.invest(t, j) = it->second.invest;
      panel.value(t, j) = it->second.value;
      panel.capital(t, j) = it->second.capital;
    }
  }
  check_shape(panel);
  return panel;
}

PanelData parse_wide(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty() || rows[0].empty() || rows[0][0] != "year")
    throw ParseError("CSV parse error at row 1, column 1: expected 'year'");
  const auto& header = rows[0];
  if ((header.size() - 1) % 3 != 0)
    fail_at(1, header.size(), "expected year followed by invest/value/capital triples");
  const std::size_t p = (header.size() - 1) / 3;
  PanelData panel;
  const char* fields[] = {":invest", ":value", ":capital"};
  for (std::size_t j = 0; j < p; ++j) {
    const std::string& first = header[1 + 3 * j];
    const auto colon = first.rfind(':');
    if (colon == std::string::npos) fail_at(1, 2 + 3 * j, "expected <firm>:invest");
    const std::string name = first.substr(0, colon);
    for (int k = 0; k < 3; ++k)
      if (header[1 + 3 * j + k] != name + fields[k]) fail_at(1, 2 + 3 * j + k, "expected " + name + fields[k]);
    panel.firms.push_back(name);
  }
  const std::size_t T = rows.size() - 1;
  panel.invest = Matrix(T, p);
  panel.value = Matrix(T, p);
  panel.capital = Matrix(T, p);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& row = rows[t + 1];
    const std::size_t line = t + 2;
    if (row.size() != header.size())
      fail_at(line, std::min(row.size(), header.size()) + 1,
              "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(row.size()));
    panel.years.push_back(parse_year(row[0], line, 1));
    if (t > 0 && panel.years[t] <= panel.years[t - 1])
      throw PanelError("years must be strictly increasing (year " + std::to_string(panel.years[t]) + ")");
    for (std::size_t j = 0; j < p; ++j) {
      panel.invest(t, j) = parse_number(row[1 + 3 * j], line, 2 + 3 * j);
      panel.value(t, j) = parse_number(row[2 + 3 * j], line, 3 + 3 * j);
      panel.capital(t, j) = parse_number(row[3 + 3 * j], line, 4 + 3 * j);
    }
  }
  check_shape(panel);
  return panel;
}

}  // namespace

PanelFormat parse_panel_format(const std::string& s) {
  if (s == "long" || s == "long-csv") return PanelFormat::long_csv;
  if (s == "wide" || s == "wide-csv") return PanelFormat::wide_csv;
  throw std::invalid_argument("unknown panel format: " + s);
}

PanelData parse_panel(const std::string& text, PanelFormat format) {
  const auto rows = read_rows(text);
  return format == PanelFormat::long_csv ? parse_long(rows) : parse_wide(rows);
}

PanelData load_panel(const std::string& path, PanelFormat format) {
  return parse_panel(read_text_file(path), format);
}

std::string panel_to_csv(const PanelData& panel, PanelFormat format) {
  const std::size_t T = panel.years.size(), p = panel.firms.size();
  std::string out;
  if (format == PanelFormat::long_csv) {
    out = "firm_id,firm_name,year,invest,value,capital\n";
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t t = 0; t < T; ++t)
        out += std::to_string(j + 1) + ',' + panel.firms[j] + ',' + std::to_string(panel.years[t]) + ',' +
               format_double(panel.invest(t, j)) + ',' + format_double(panel.value(t, j)) + ',' +
               format_double(panel.capital(t, j)) + '\n';
    return out;
  }
  out = "year";
  for (const auto& f : panel.firms) out += ',' + f + ":invest," + f + ":value," + f + ":capital";
  out += '\n';
  for (std::size_t t = 0; t < T; ++t) {
    out += std::to_string(panel.years[t]);
    for (std::size_t j = 0; j < p; ++j)
      out += ',' + format_double(panel.invest(t, j)) + ',' + format_double(panel.value(t, j)) + ',' +
             format_double(panel.capital(t, j));
    out += '\n';
  }
  return out;
}

}  // namespace sglasso
