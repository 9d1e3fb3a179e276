#include "mtrl/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace mtrl {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& v) {
  bool needs = false;
  for (char c : v)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') {
      needs = true;
      break;
    }
  if (!needs) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header)
    : ncols_(header.size()) {
  if (header.empty()) throw std::invalid_argument("CsvWriter: empty header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) buf_ += ',';
    buf_ += csv_field(header[i]);
  }
  buf_ += '\n';
}

CsvWriter& CsvWriter::raw(const std::string& v) {
  if (cur_ >= ncols_) throw std::logic_error("CsvWriter: row too wide");
  if (cur_) buf_ += ',';
  buf_ += v;
  ++cur_;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) { return raw(csv_field(v)); }

void CsvWriter::endrow() {
  if (cur_ != ncols_) throw std::logic_error("CsvWriter: short row");
  buf_ += '\n';
  cur_ = 0;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(text.data(), std::streamsize(text.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string out((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  std::size_t i = 0;
  auto flush_field = [&] {
    row.push_back(field);
    field.clear();
    any = true;
  };
  auto flush_row = [&] {
    if (any || !row.empty()) {
      flush_field();
      rows.push_back(row);
      row.clear();
      any = false;
      field.clear();
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      flush_field();
    } else if (c == '\n') {
      flush_row();
    } else if (c != '\r') {
      field += c;
      any = true;
    }
    ++i;
  }
  if (any || !field.empty() || !row.empty()) flush_row();
  return rows;
}

}  // namespace mtrl
