#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace shoulder {

/// Minimal numeric CSV writer; values are printed with round-trip precision.
class CsvWriter {
public:
  explicit CsvWriter(const std::filesystem::path& path);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);

private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws InvalidArgument when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace shoulder
