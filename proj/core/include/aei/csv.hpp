#pragma once

// Minimal CSV emission: UTF-8, LF line endings, comma separated, '.' decimal
// point, doubles with 17 significant digits so values round-trip exactly.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aei {

std::string format_double(double value);

using CsvField = std::variant<std::string, double, long, bool>;

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);

  void row(const std::vector<CsvField>& fields);
  void flush();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

// Parses a file written by CsvWriter (no quoting); first row is the header.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Strict double parse of a field written by format_double.
double parse_double(std::string_view field);

}  // namespace aei
