#pragma once

#include <complex>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace statphase {

/// Shortest decimal string that parses back to exactly `v` ("nan", "inf", "-inf" for non-finite values).
std::string format_double(double v);

/// Comma-separated rows with an optional block of "# key=value" provenance lines before the header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_comment(std::string_view line);
  /// Cells are written verbatim; use format_double for numbers.
  void add_row(std::vector<std::string> cells);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream& os) const;
  std::string str() const;

 private:
  std::vector<std::string> comments_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace statphase
