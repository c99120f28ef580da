#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace splitflow::cli {

/// RFC 4180 CSV writer: header row, CRLF line endings, shortest
/// round-trip number formatting.  Identical inputs produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  void row_mixed(const std::vector<std::string>& cells);
  void close();

  static std::string format(double v);

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
  std::string path_;
};

}  // namespace splitflow::cli
