#include "cli/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace leafhol::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw std::logic_error("table '" + name + "' row has " + std::to_string(row.size()) + " cells, header has " +
                           std::to_string(header.size()));
  rows.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += quote(cells[i]);
  }
  out += '\n';
}

}  // namespace

std::string render_csv(const Table& table, const std::string& timestamp_line) {
  std::string out;
  if (!timestamp_line.empty()) out += "# " + timestamp_line + "\n";
  append_line(out, table.header);
  for (const auto& row : table.rows) append_line(out, row);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace leafhol::cli
