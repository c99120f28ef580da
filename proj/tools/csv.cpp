#include "csv.hpp"

#include <charconv>
#include <stdexcept>

namespace splitflow::cli {

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()), path_(path) {
  if (!out_) throw std::runtime_error("cannot open CSV output: " + path);
  row_mixed(header);
}

std::string CsvWriter::format(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("CSV number formatting failed");
  return std::string(buf, ptr);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw std::runtime_error("CSV row width mismatch in " + path_);
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format(values[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::row_mixed(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::runtime_error("CSV row width mismatch in " + path_);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << "\r\n";
}

void CsvWriter::close() {
  out_.flush();
  out_.close();
  if (!out_) throw std::runtime_error("failed writing CSV output: " + path_);
}

}  // namespace splitflow::cli
