#include "shoulder/csv.hpp"

#include <charconv>
#include <sstream>

#include "shoulder/errors.hpp"

namespace shoulder {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw InvalidArgument("cannot open for writing: " + path.string());
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InvalidArgument("missing CSV column: " + name);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open CSV: " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV: " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      double v = 0.0;
      const auto res = std::from_chars(line.data() + start, line.data() + end, v);
      if (res.ec != std::errc()) throw InvalidArgument("bad number in " + path.string() + ": " + line);
      row.push_back(v);
      start = end + 1;
    }
    if (row.size() != t.header.size()) throw InvalidArgument("ragged CSV row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace shoulder
