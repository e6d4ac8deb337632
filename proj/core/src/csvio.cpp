#include "pathclosure/csvio.hpp"

#include <cstdio>

namespace pathclosure::csvio {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

CsvWriter::CsvWriter(std::filesystem::path path, const std::string& provenance)
    : final_path_(std::move(path)) {
  tmp_path_ = final_path_;
  tmp_path_ += ".tmp";
  out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw std::runtime_error("csv: cannot open " + tmp_path_.string());
  }
  out_ << "# " << provenance << "\n";
}

CsvWriter::~CsvWriter() {
  if (!closed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(tmp_path_, ec);
  }
}

void CsvWriter::header(const std::vector<std::string>& names) { row_raw(names); }

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row_raw(cells);
}

void CsvWriter::row_raw(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ",";
    out_ << cells[i];
  }
  out_ << "\n";
}

void CsvWriter::close() {
  if (closed_) return;
  out_.flush();
  out_.close();
  std::filesystem::rename(tmp_path_, final_path_);
  closed_ = true;
}

}  // namespace pathclosure::csvio
