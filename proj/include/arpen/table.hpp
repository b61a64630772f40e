#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arpen {

enum class ReportFormat { Table, Csv };

/// Small row/column report: aligned text or comma-separated values.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void write(std::ostream& out, ReportFormat format) const;
};

/// "%.*f", or "NA" for NaN.
std::string fixed(double v, int digits);

}  // namespace arpen
