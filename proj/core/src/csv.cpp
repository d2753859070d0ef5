#include "aei/csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "aei/errors.hpp"

namespace aei {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field) {
  if (field == "nan") return std::nan("");
  if (field == "inf") return INFINITY;
  if (field == "-inf") return -INFINITY;
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InvalidArgument("parse_double: malformed field '" + std::string(field) + "'");
  }
  return value;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::vector<std::string> header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc),
      columns_(header.size()) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  std::vector<CsvField> fields(header.begin(), header.end());
  row(fields);
}

void CsvWriter::row(const std::vector<CsvField>& fields) {
  if (fields.size() != columns_) {
    throw InvalidArgument("CsvWriter: row width does not match header");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [this](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, std::string>) {
            out_ << f;
          } else if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(f);
          } else if constexpr (std::is_same_v<T, bool>) {
            out_ << (f ? "true" : "false");
          } else {
            out_ << f;
          }
        },
        fields[i]);
  }
  out_ << '\n';
}

void CsvWriter::flush() { out_.flush(); }

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace aei
