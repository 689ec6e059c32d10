#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace msim::cli {

/// A numeric table with `#` comment lines above and below it.
struct CsvDocument {
  std::vector<std::string> header;  ///< comment lines, written without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> footer;

  /// Throws InvalidArgument when the row width does not match the columns.
  void add_row(std::vector<double> row);
};

void write_csv(std::ostream& out, const CsvDocument& doc);
std::string to_csv(const CsvDocument& doc);

/// Writes to `path`, or to stdout when it is empty. I/O failures throw
/// InvalidArgument naming the path.
void write_output(const std::string& path, const std::string& text);

}  // namespace msim::cli
