#include "fregls/format.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace fregls {

std::string format_sig(double x, int significant) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
  return buf;
}

std::string format_fixed(double x, int decimals) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

NumberFormat csv_number_format() {
  return [](double x) { return format_sig(x, 6); };
}

NumberFormat markdown_number_format() {
  return [](double x) { return format_fixed(x, 2); };
}

void Table::add_row(std::string name, std::vector<std::string> cells) {
  if (!columns.empty() && cells.size() != columns.size()) {
    throw std::invalid_argument("table row has wrong number of cells");
  }
  row_names.push_back(std::move(name));
  rows.push_back(std::move(cells));
}

namespace {

bool has_row_labels(const Table& t) {
  for (const auto& name : t.row_names) {
    if (!name.empty()) return true;
  }
  return !t.corner.empty();
}

}  // namespace

std::string to_csv(const Table& table) {
  std::ostringstream out;
  const bool labeled = has_row_labels(table);
  if (labeled) out << table.corner;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (labeled || c > 0) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (labeled) out << table.row_names[r];
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      if (labeled || c > 0) out << ',';
      out << table.rows[r][c];
    }
    out << '\n';
  }
  return out.str();
}

std::string to_markdown(const Table& table) {
  std::ostringstream out;
  const bool labeled = has_row_labels(table);
  out << '|';
  if (labeled) out << ' ' << table.corner << " |";
  for (const auto& col : table.columns) out << ' ' << col << " |";
  out << "\n|";
  if (labeled) out << " --- |";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << " ---: |";
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << '|';
    if (labeled) out << ' ' << table.row_names[r] << " |";
    for (const auto& cell : table.rows[r]) out << ' ' << cell << " |";
    out << '\n';
  }
  return out.str();
}

}  // namespace fregls
