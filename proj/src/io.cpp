#include "fregls/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fregls/format.hpp"

namespace fregls {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    // trim surrounding whitespace
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

bool try_parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

double parse_double(const std::string& s, std::size_t line, std::size_t column) {
  double v;
  if (!try_parse_double(s, v)) {
    throw ParseError("expected a number, got '" + s + "'", line, column);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite value", line, column);
  return v;
}

long parse_int(const std::string& s, std::size_t line, std::size_t column) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos == s.size()) return v;
  } catch (...) {
  }
  throw ParseError("expected an integer, got '" + s + "'", line, column);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

FunctionalSample read_functional_wide(const std::string& path) {
  const auto lines = read_lines(path);
  std::size_t ln = 0;
  while (ln < lines.size() && blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("empty file: " + path, 1);

  const auto header = split_csv_line(lines[ln]);
  double probe;
  const bool has_ids = !try_parse_double(header.front(), probe);
  const std::size_t first_value = has_ids ? 1 : 0;
  const int m = static_cast<int>(header.size() - first_value);
  if (m < 2) throw ParseError("wide-format header needs at least two grid points", ln + 1);

  Eigen::VectorXd grid_points(m);
  for (int j = 0; j < m; ++j) {
    grid_points(j) = parse_double(header[first_value + j], ln + 1, first_value + j + 1);
    if (j > 0 && !(grid_points(j) > grid_points(j - 1))) {
      throw ParseError("wide-format header grid points must be strictly increasing", ln + 1,
                       first_value + j + 1);
    }
  }

  std::vector<std::string> ids;
  std::vector<Eigen::VectorXd> rows;
  for (std::size_t i = ln + 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto fields = split_csv_line(lines[i]);
    if (static_cast<int>(fields.size()) != m + static_cast<int>(first_value)) {
      throw ParseError("expected " + std::to_string(m + first_value) + " fields, got " +
                           std::to_string(fields.size()),
                       i + 1);
    }
    if (has_ids) ids.push_back(fields[0]);
    Eigen::VectorXd row(m);
    for (int j = 0; j < m; ++j) row(j) = parse_double(fields[first_value + j], i + 1, first_value + j + 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no curves in file: " + path, ln + 2);

  Eigen::MatrixXd values(static_cast<int>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i) values.row(static_cast<int>(i)) = rows[i];
  return FunctionalSample(Grid::from_points(std::move(grid_points)), std::move(values),
                          std::move(ids));
}

FunctionalSample read_functional_long(const std::string& path) {
  const auto lines = read_lines(path);
  std::size_t ln = 0;
  while (ln < lines.size() && blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("empty file: " + path, 1);
  if (split_csv_line(lines[ln]).size() != 3) {
    throw ParseError("long format needs exactly three columns (id, t, value)", ln + 1);
  }

  std::vector<std::string> id_order;
  std::map<std::string, std::map<double, double>> curves;
  for (std::size_t i = ln + 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 3) throw ParseError("expected 3 fields", i + 1);
    const std::string& id = fields[0];
    const double t = parse_double(fields[1], i + 1, 2);
    const double v = parse_double(fields[2], i + 1, 3);
    if (curves.find(id) == curves.end()) id_order.push_back(id);
    auto& curve = curves[id];
    if (!curve.emplace(t, v).second) {
      throw ParseError("duplicate grid point t=" + fields[1] + " for id '" + id + "'", i + 1);
    }
  }
  if (id_order.empty()) throw ParseError("no observations in file: " + path, ln + 2);

  // Shared grid: union of evaluation points; every curve must cover it.
  std::vector<double> grid_values;
  for (const auto& [t, v] : curves[id_order.front()]) grid_values.push_back(t);
  const int m = static_cast<int>(grid_values.size());
  Eigen::MatrixXd values(static_cast<int>(id_order.size()), m);
  for (std::size_t i = 0; i < id_order.size(); ++i) {
    const auto& curve = curves[id_order[i]];
    if (static_cast<int>(curve.size()) != m) {
      throw ParseError("id '" + id_order[i] + "' has " + std::to_string(curve.size()) +
                           " points but the grid has " + std::to_string(m),
                       1);
    }
    int j = 0;
    for (const auto& [t, v] : curve) {
      if (t != grid_values[static_cast<std::size_t>(j)]) {
        throw ParseError("id '" + id_order[i] + "' is observed on a different grid", 1);
      }
      values(static_cast<int>(i), j) = v;
      ++j;
    }
  }
  Eigen::VectorXd grid_points = Eigen::Map<Eigen::VectorXd>(grid_values.data(), m);
  return FunctionalSample(Grid::from_points(std::move(grid_points)), std::move(values),
                          std::move(id_order));
}

Eigen::VectorXd read_scalar_csv(const std::string& path) {
  const auto lines = read_lines(path);
  std::vector<double> values;
  bool first_content = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != 1) throw ParseError("expected a single column", i + 1);
    double v;
    if (!try_parse_double(fields[0], v)) {
      if (first_content) {
        first_content = false;
        continue;  // header line
      }
      throw ParseError("expected a number, got '" + fields[0] + "'", i + 1);
    }
    if (!std::isfinite(v)) throw ParseError("non-finite value", i + 1);
    values.push_back(v);
    first_content = false;
  }
  if (values.empty()) throw ParseError("no values in file: " + path, 1);
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<int>(values.size()));
}

namespace {

struct PanelRows {
  std::vector<std::string> group_order;
  std::map<std::string, std::map<long, std::vector<double>>> rows;  // group -> week -> payload
  int payload_size = 0;
};

PanelRows read_panel_rows(const std::string& path, std::size_t fixed_payload) {
  const auto lines = read_lines(path);
  std::size_t ln = 0;
  while (ln < lines.size() && blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("empty file: " + path, 1);
  const auto header = split_csv_line(lines[ln]);
  if (header.size() < 3) {
    throw ParseError("panel file needs at least (group, week, value...) columns", ln + 1);
  }
  PanelRows out;
  out.payload_size = static_cast<int>(header.size() - 2);
  if (fixed_payload && header.size() - 2 != fixed_payload) {
    throw ParseError("expected " + std::to_string(fixed_payload + 2) + " columns", ln + 1);
  }
  for (std::size_t i = ln + 1; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       i + 1);
    }
    const std::string& group = fields[0];
    const long week = parse_int(fields[1], i + 1, 2);
    std::vector<double> payload(out.payload_size);
    for (int j = 0; j < out.payload_size; ++j) payload[j] = parse_double(fields[2 + j], i + 1, 3 + j);
    if (out.rows.find(group) == out.rows.end()) out.group_order.push_back(group);
    if (!out.rows[group].emplace(week, std::move(payload)).second) {
      throw ParseError("duplicate week " + std::to_string(week) + " for group '" + group + "'",
                       i + 1);
    }
  }
  if (out.group_order.empty()) throw ParseError("no rows in file: " + path, ln + 2);

  // Weeks must be consecutive and shared across groups.
  const auto& reference = out.rows[out.group_order.front()];
  for (const auto& group : out.group_order) {
    const auto& weeks = out.rows[group];
    if (weeks.size() != reference.size() || weeks.begin()->first != reference.begin()->first) {
      throw ParseError("group '" + group + "' covers different weeks", 1);
    }
    long expected = weeks.begin()->first;
    for (const auto& [week, payload] : weeks) {
      if (week != expected) {
        throw ParseError("weeks of group '" + group + "' are not consecutive", 1);
      }
      ++expected;
    }
  }
  return out;
}

}  // namespace

PanelResponse read_panel_response(const std::string& path) {
  const PanelRows rows = read_panel_rows(path, 1);
  PanelResponse out;
  out.groups = rows.group_order;
  for (const auto& group : rows.group_order) {
    const auto& weeks = rows.rows.at(group);
    Eigen::VectorXd y(static_cast<int>(weeks.size()));
    int i = 0;
    for (const auto& [week, payload] : weeks) y(i++) = payload[0];
    out.series.push_back(std::move(y));
  }
  return out;
}

PanelCovariate read_panel_covariate(const std::string& path) {
  const auto lines = read_lines(path);
  std::size_t ln = 0;
  while (ln < lines.size() && blank(lines[ln])) ++ln;
  if (ln == lines.size()) throw ParseError("empty file: " + path, 1);
  const auto header = split_csv_line(lines[ln]);
  if (header.size() < 4) {
    throw ParseError("covariate panel needs (group, week, t_1..t_M) columns", ln + 1);
  }
  const int m = static_cast<int>(header.size() - 2);
  Eigen::VectorXd grid_points(m);
  for (int j = 0; j < m; ++j) {
    grid_points(j) = parse_double(header[2 + j], ln + 1, 3 + j);
    if (j > 0 && !(grid_points(j) > grid_points(j - 1))) {
      throw ParseError("covariate grid points must be strictly increasing", ln + 1, 3 + j);
    }
  }
  const Grid grid = Grid::from_points(grid_points);

  const PanelRows rows = read_panel_rows(path, static_cast<std::size_t>(m));
  PanelCovariate out;
  out.groups = rows.group_order;
  for (const auto& group : rows.group_order) {
    const auto& weeks = rows.rows.at(group);
    Eigen::MatrixXd values(static_cast<int>(weeks.size()), m);
    int i = 0;
    for (const auto& [week, payload] : weeks) {
      for (int j = 0; j < m; ++j) values(i, j) = payload[static_cast<std::size_t>(j)];
      ++i;
    }
    out.samples.emplace_back(grid, std::move(values));
  }
  return out;
}

Panel read_panel(const std::string& response_path,
                 const std::vector<std::pair<std::string, std::string>>& covariates) {
  const PanelResponse response = read_panel_response(response_path);
  Panel panel;
  for (std::size_t g = 0; g < response.groups.size(); ++g) {
    PanelGroup group;
    group.name = response.groups[g];
    group.y = response.series[g];
    panel.groups.push_back(std::move(group));
  }
  for (const auto& [name, path] : covariates) {
    const PanelCovariate cov = read_panel_covariate(path);
    if (cov.groups != response.groups) {
      throw ParseError("covariate '" + name + "' groups do not match the response panel", 1);
    }
    for (std::size_t g = 0; g < panel.groups.size(); ++g) {
      panel.groups[g].covariates.emplace(name, cov.samples[g]);
    }
  }
  panel.validate();
  return panel;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_basis_csv(const std::string& path, const BasisSpec& basis) {
  std::vector<std::string> header;
  header.reserve(static_cast<std::size_t>(basis.grid.size()));
  for (int j = 0; j < basis.grid.size(); ++j) {
    header.push_back(format_sig(basis.grid.points(j), 12));
  }
  write_matrix_csv(path, basis.eval, header);
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header) {
  std::ostringstream out;
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c > 0) out << ',';
      out << header[c];
    }
    out << '\n';
  }
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_sig(values(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace fregls
