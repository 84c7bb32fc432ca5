#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace leafhol::cli {

/// 17 significant digits, so reruns compare byte for byte.
std::string format_number(double v);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

std::string render_csv(const Table& table, const std::string& timestamp_line);

/// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace leafhol::cli
