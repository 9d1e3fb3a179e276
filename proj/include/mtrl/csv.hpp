#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtrl {

// Shortest decimal string that parses back to exactly x. Locale-free.
std::string format_double(double x);

// Quotes the field if it contains a comma, quote, or line break.
std::string csv_field(const std::string& v);

// Row-oriented CSV builder: header fixed at construction, LF line endings,
// every row checked against the column count.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  CsvWriter& cell(double v) { return raw(format_double(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::int64_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::uint64_t v) { return raw(std::to_string(v)); }
  void endrow();

  const std::string& text() const { return buf_; }

 private:
  CsvWriter& raw(const std::string& v);

  std::string buf_;
  std::size_t ncols_ = 0, cur_ = 0;
};

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Minimal reader for the report aggregator: header plus unquoted rows is
// enough for files this tool writes; quoted fields are handled anyway.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace mtrl
