#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace pathclosure::csvio {

std::string format_double(double v);
std::uint64_t fnv1a(std::string_view data);

/// CSV writer with a provenance comment line; the file appears atomically
/// (temp + rename) on close.
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, const std::string& provenance);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  void row_raw(const std::vector<std::string>& cells);
  void close();

 private:
  std::filesystem::path final_path_;
  std::filesystem::path tmp_path_;
  std::ofstream out_;
  bool closed_ = false;
};

}  // namespace pathclosure::csvio
