#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fregls {

/// %.6g-style rendering used in CSV output.
std::string format_sig(double x, int significant = 6);

/// Fixed-decimal rendering used in markdown tables.
std::string format_fixed(double x, int decimals = 2);

using NumberFormat = std::function<std::string(double)>;

NumberFormat csv_number_format();
NumberFormat markdown_number_format();

/// A rectangular table with optional row labels; cells are preformatted.
struct Table {
  std::string corner;  // header above the row-label column; empty = no labels
  std::vector<std::string> columns;
  std::vector<std::string> row_names;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::string name, std::vector<std::string> cells);
};

std::string to_csv(const Table& table);
std::string to_markdown(const Table& table);

}  // namespace fregls
